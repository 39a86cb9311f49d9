#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regsyn/model.h"
#include "regsyn/specan.h"

namespace regsyn {

class SynthesisError : public Error {
 public:
  using Error::Error;
};

// xi' = phi(xi) + Bc e, u = lambda(xi), together with the linearizations
// Phi = D phi(0), Lambda = D lambda(0).
struct InternalModel {
  int nu = 0;
  std::vector<Expr> phi;
  Expr lambda;
  Eigen::MatrixXd Phi;
  Eigen::RowVectorXd Lambda;
  std::optional<Eigen::VectorXd> bc;
};

// Linearizes the given maps at the origin.
InternalModel internal_model_from_maps(std::vector<Expr> phi, Expr lambda,
                                       std::optional<Eigen::VectorXd> bc = std::nullopt);
// phi(xi) = Phi xi, lambda(xi) = Lambda xi.
InternalModel linear_internal_model(const Eigen::MatrixXd& Phi, const Eigen::RowVectorXd& Lambda,
                                    std::optional<Eigen::VectorXd> bc = std::nullopt);
InternalModel internal_model_from_controller(const ControllerModel& controller);
ControllerModel to_controller(const InternalModel& im);

// Sum_j coeffs(i, j) xi_j as an expression, omitting zero terms.
std::vector<Expr> linear_map_exprs(const Eigen::MatrixXd& coeffs, const std::string& prefix);

// Restricts the linear part of the internal model to the invariant subspace
// of its imaginary-axis eigenvalues. The result is a linear internal model.
InternalModel center_reduce(const InternalModel& im, double tol = 1e-7);

// [[A, B Lambda], [Bc C, Phi + Bc D Lambda]].
Eigen::MatrixXd closed_loop_matrix(const LinearizedData& lin, const InternalModel& im);

struct TransferSample {
  Complex point;
  Complex value;
};

struct VerificationFlags {
  bool a_hurwitz = false;
  double a_abscissa = 0.0;
  bool detectable = false;
  bool transfer_nonzero = false;
  std::vector<TransferSample> transfer_values;
  bool spectrum_on_axis = false;

  // Items required before the epsilon scan.
  bool ok() const { return a_hurwitz && detectable && transfer_nonzero; }
  // Name of the first failing item, empty if ok() and spectrum_on_axis.
  std::string failure() const;
};

VerificationFlags verify_conditions(const LinearizedData& lin, const InternalModel& im,
                                    double transfer_tol = 1e-9, double axis_tol = 1e-7);

// Coefficients a_1..a_m such that z^m + g sum_k a_k z^{m-k} has its zeros at
// the Butterworth positions of radius one. Real when g is real.
std::vector<Complex> choose_block_coefficients(int m, Complex g);

// Input vector whose controller transfer function is
// -sum_j sum_k a_jk eps^k / (z - lambda_j)^k. `coeffs` is indexed like
// jd.blocks; entries of conjugate blocks are ignored and mirrored from
// their partner. Returns the real Bc; `bhat` receives the Jordan-coordinate
// vector if non-null.
Eigen::VectorXd build_bc(const JordanData& jd, const Eigen::RowVectorXd& cc, double eps,
                         const std::vector<std::vector<Complex>>& coeffs,
                         Eigen::VectorXcd* bhat = nullptr);

struct SynthesisOptions {
  double eps0 = 1.0;
  double factor = 0.5;
  int max_halvings = 40;
  double margin = 1e-6;
};

struct SynthesisReport {
  bool success = false;
  double eps = 0.0;
  int attempts = 0;
  VerificationFlags flags;
  JordanData jordan;
  std::vector<std::vector<Complex>> coefficients;
  Eigen::VectorXcd bhat;
  Eigen::VectorXd bc;
  Eigen::MatrixXd a_cl;
  double abscissa = 0.0;
};

// Throws SynthesisError when a precondition fails. An exhausted scan
// returns a report with success == false.
SynthesisReport synthesize(const LinearizedData& lin, const InternalModel& im,
                           const SynthesisOptions& options = {});

struct LinearRegulator {
  Eigen::MatrixXd Pi;
  Eigen::RowVectorXd Gamma;
  double residual_state = 0.0;
  double residual_output = 0.0;
  double condition = 0.0;
};

// Pi S = A Pi + B Gamma + P, C Pi + D Gamma + Q = 0.
LinearRegulator solve_linear_regulator(const LinearizedData& lin);

}  // namespace regsyn
