#pragma once

// Averaged boost converter: regulator PDE solved on characteristic circles
// (w1 fixed, w2 = rho cos tau, w3 = rho sin tau), where pi^2 reduces to a
// periodic solution psi(tau) of a scalar ODE.

#include <iosfwd>
#include <string>
#include <vector>

#include "regsyn/expr.h"

namespace regsyn {

class BoostError : public Error {
 public:
  using Error::Error;
};

struct BoostParams {
  double C = 0.0;
  double L = 0.0;
  double R = 0.0;
  double r = 0.0;
  double v0 = 0.0;
  double z10 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  // Derived by with_equilibrium().
  double D0 = 0.0;
  double z20 = 0.0;
};

// Values used throughout the examples: v0 = 100 V, z10 = 400 V, R = 400,
// r = 0.25, L = 4 mH, C = 40 uF, alpha = 200 pi, beta = 0.9.
BoostParams default_boost_params();

struct Equilibrium {
  double D0;
  double z20;
};

// Root of z10 D0^2 - v0 D0 + z10 r / R = 0 with the smaller current
// z20 = z10 / (R D0).
Equilibrium boost_equilibrium(const BoostParams& params);

// Validates the physical parameters and fills D0, z20.
BoostParams with_equilibrium(BoostParams params);

// d psi / d tau on the circle (w1, rho).
double psi_rhs(double psi, double tau, double w1, double rho, const BoostParams& params);

struct PsiBounds {
  double psi1;
  double psi2;
};

PsiBounds psi_bounds(double w1, double rho, const BoostParams& params);

double w1_max(const BoostParams& params);
double rho_max(double w1, const BoostParams& params);
bool in_domain(double w1, double rho, const BoostParams& params);

struct Orbit {
  std::vector<double> tau;
  std::vector<double> psi;
  std::vector<double> gamma;
};

struct PsiOptions {
  int ode_steps = 2000;
  int max_iter = 200;
  // Convergence when |psi(2 pi) - psi(0)| < tol_factor (1 + |psi1|).
  double tol_factor = 1e-9;
};

struct PsiSolution {
  double psi0 = 0.0;
  int iterations = 0;
  double mismatch = 0.0;  // |psi(2 pi) - psi(0)| of the returned orbit
  PsiBounds bounds{0.0, 0.0};
  Orbit orbit;
};

// Integrates one full circle from psi(0) = start with fixed-step RK4.
Orbit integrate_circle(double start, double w1, double rho, const BoostParams& params, int steps);

// Fixed-point iteration psi^n(0) = psi^{n-1}(2 pi) from the midpoint of
// [psi2, psi1]. Fills orbit.gamma.
PsiSolution solve_psi0(double w1, double rho, const BoostParams& params,
                       const PsiOptions& options = {});

// gamma = (rho cos tau - D0 psi) / (psi + z20).
double recover_gamma(double psi, double tau, double rho, const BoostParams& params);
std::vector<double> recover_gamma(const Orbit& orbit, double rho, const BoostParams& params);

struct BoostCell {
  double w1 = 0.0;
  double rho = 0.0;
  bool present = false;
  bool converged = false;
  int iterations = 0;
  double psi0 = 0.0;
  double mismatch = 0.0;
  PsiBounds bounds{0.0, 0.0};
  std::string error;
  Orbit orbit;
};

struct BoostSolution {
  BoostParams params;
  std::vector<double> w1_values;
  std::vector<double> rho_values;
  // cells[i * rho_values.size() + j] holds (w1_values[i], rho_values[j]).
  std::vector<BoostCell> cells;

  const BoostCell& cell(std::size_t i, std::size_t j) const {
    return cells[i * rho_values.size() + j];
  }
};

struct GridOptions {
  PsiOptions psi;
  unsigned threads = 0;  // 0: hardware concurrency
  bool keep_orbits = true;
};

// Uniform axes: |w1| <= 0.95 w1max and 0 <= rho <= 0.95 beta D0 z20.
void default_grid_axes(const BoostParams& params, int n_w1, int n_rho, std::vector<double>& w1,
                       std::vector<double>& rho);

// Solves every cell of the tensor grid. A cell is present when
// rho <= 0.95 rho_max(w1) and rho_max(w1) > 0; absent cells are not solved.
BoostSolution solve_boost_grid(const BoostParams& params, const std::vector<double>& w1_values,
                               const std::vector<double>& rho_values,
                               const GridOptions& options = {});
BoostSolution solve_boost_grid(const BoostParams& params, int n_w1, int n_rho,
                               const GridOptions& options = {});

// Residual of the quasilinear PDE for pi^2 at every interior grid sample,
// with the partial derivatives in w2, w3 rebuilt from finite differences in
// rho (neighbouring cells) and tau (periodic). Normalized by
// rho + z20 |w1| / z10. Throws if no cell has both rho neighbours.
double pde_residual(const BoostSolution& sol);

// Largest absolute second difference of psi0 along either grid axis over
// triples of converged cells.
double psi0_max_second_difference(const BoostSolution& sol);

// Share of the non-DC energy of a periodic sample sequence (last sample
// equal to the first is dropped) carried by the first harmonic.
double first_harmonic_fraction(const std::vector<double>& samples);

void write_grid_csv(std::ostream& os, const BoostSolution& sol);
void write_orbit_csv(std::ostream& os, const Orbit& orbit);

}  // namespace regsyn
