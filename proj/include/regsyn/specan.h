#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "regsyn/expr.h"
#include "regsyn/model.h"

namespace regsyn {

using Complex = std::complex<double>;

class SpectralError : public Error {
 public:
  using Error::Error;
};

// Max absolute row sum.
double inf_norm(const Eigen::MatrixXd& m);

// Eigenvalues with algebraic multiplicities. Eigenvalues closer than
// clustering_radius(M) are merged, as are groups of q whose spread is below
// 10 u^(1/q) (1 + |M|_inf) (u: machine epsilon), the scatter of a perturbed
// Jordan block; `values` holds the cluster means.
struct Spectrum {
  std::vector<Complex> values;
  std::vector<int> multiplicities;
  std::vector<Complex> raw;

  int size() const { return static_cast<int>(raw.size()); }
};

double clustering_radius(const Eigen::MatrixXd& m);

Spectrum eigen(const Eigen::MatrixXd& m);

double spectral_abscissa(const Eigen::MatrixXd& m);
bool is_hurwitz(const Eigen::MatrixXd& m, double margin = 0.0);

// Hautus test over the closed right half plane: [M - lambda I; Cm] must have
// smallest singular value above tol * max(1, |M|_inf).
bool hautus_detectable(const Eigen::RowVectorXd& cm, const Eigen::MatrixXd& m,
                       double tol = 1e-8);

// Solves a x = b through the real embedding [[Re a, -Im a], [Im a, Re a]].
// Throws SpectralError when the reciprocal condition estimate is below
// min_rcond.
Eigen::VectorXcd solve_complex(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                               double min_rcond = 1e-12);

// G(z) = C (zI - A)^{-1} B + D.
Complex transfer_function(const LinearizedData& lin, Complex z);
Complex transfer_function(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& a,
                          const Eigen::VectorXd& b, double d, Complex z);

struct JordanBlock {
  Complex lambda;  // i * alpha
  double alpha = 0.0;
  int size = 0;
  int offset = 0;  // first column in T
  // Index of the conjugate block, or -1 for the block at zero.
  int conjugate = -1;
};

// T^{-1} S T = J. Blocks are ordered J_0 (if present), then for increasing
// alpha > 0 the block at +i alpha followed by its conjugate.
struct JordanData {
  std::vector<JordanBlock> blocks;
  Eigen::MatrixXcd T;
  Eigen::MatrixXcd J;
};

JordanData jordan_structure(const Eigen::MatrixXd& s, double tol = 1e-7);

// Spectral projector onto the invariant subspace of the eigenvalues with
// |Re| <= tol. `basis` has orthonormal columns spanning the image of P and
// `reduced` = basis^T M basis.
struct CenterProjector {
  Eigen::MatrixXd P;
  Eigen::MatrixXd basis;
  Eigen::MatrixXd reduced;

  int order() const { return static_cast<int>(basis.cols()); }
};

CenterProjector center_projector(const Eigen::MatrixXd& m, double tol = 1e-7);

}  // namespace regsyn
