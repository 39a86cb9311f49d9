#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "regsyn/model.h"

namespace regsyn {

// pi: X-valued and gamma: U-valued maps of w solving
//   (d pi / dw) s(w) = f(pi(w), gamma(w), w),  h(pi(w), gamma(w), w) = 0.
struct RegulatorSolution {
  std::vector<Expr> pi;
  Expr gamma;
  double radius = 0.0;
};

RegulatorSolution make_regulator_solution(int n, int p, std::vector<Expr> pi, Expr gamma,
                                          double radius);

// tau maps w into the state space of xi' = phi(xi) with output lambda(xi).
struct ImmersionMap {
  std::vector<Expr> tau;
  std::vector<Expr> phi;
  Expr lambda;
};

ImmersionMap make_immersion(int p, std::vector<Expr> tau, std::vector<Expr> phi, Expr lambda);

struct ResidualPair {
  double state = 0.0;
  double output = 0.0;
};

// Uniformly distributed points in the Euclidean ball of the given radius.
std::vector<Eigen::VectorXd> sample_ball(int dim, double radius, int count, std::uint64_t seed);

// Max over samples of |(d pi/dw) s(w) - f(pi, gamma, w)|_inf and
// |h(pi, gamma, w)|.
ResidualPair regulator_residual(const RegulatorSolution& sol, const PlantModel& plant,
                                const ExosystemModel& exo,
                                const std::vector<Eigen::VectorXd>& samples);

// Max over samples of |(d tau/dw) s(w) - phi(tau(w))|_inf and
// |gamma(w) - lambda(tau(w))|.
ResidualPair immersion_residual(const ImmersionMap& im, const ExosystemModel& exo,
                                const Expr& gamma, const std::vector<Eigen::VectorXd>& samples);

}  // namespace regsyn
