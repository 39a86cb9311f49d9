#include "regsyn/boost.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <thread>

namespace regsyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGuard = 1e-12;

double linear_coefficient(double w1, const BoostParams& p) {
  return p.r * p.z20 - w1 - p.D0 * p.z10;
}

// Smaller root of r psi^2 + b psi + c = 0, written without cancellation.
double lower_root(double b, double c, double r) {
  const double disc = b * b - 4.0 * r * c;
  if (disc < 0.0) throw BoostError("psi_bounds: negative discriminant");
  const double denom = -b + std::sqrt(disc);
  if (!(denom > 0.0)) throw BoostError("psi_bounds: degenerate quadratic");
  return 2.0 * c / denom;
}

}  // namespace

BoostParams default_boost_params() {
  BoostParams p;
  p.C = 40e-6;
  p.L = 4e-3;
  p.R = 400.0;
  p.r = 0.25;
  p.v0 = 100.0;
  p.z10 = 400.0;
  p.alpha = 200.0 * std::numbers::pi;
  p.beta = 0.9;
  return with_equilibrium(p);
}

Equilibrium boost_equilibrium(const BoostParams& p) {
  if (!(p.v0 > 0.0 && p.z10 > 0.0 && p.R > 0.0 && p.r >= 0.0)) {
    throw BoostError("boost_equilibrium: v0, z10, R must be positive and r nonnegative");
  }
  const double disc = p.v0 * p.v0 - 4.0 * p.z10 * p.z10 * p.r / p.R;
  if (disc < 0.0) throw BoostError("boost_equilibrium: no real duty ratio");
  const double d0 = (p.v0 + std::sqrt(disc)) / (2.0 * p.z10);
  if (!(d0 > 0.0 && d0 < 1.0)) {
    throw BoostError("boost_equilibrium: duty ratio " + format_double(d0) +
                     " is outside (0, 1)");
  }
  const double z20 = p.z10 / (p.R * d0);
  if (!(d0 * p.z10 > p.r * z20)) {
    throw BoostError("boost_equilibrium: D0 z10 > r z20 is violated");
  }
  const double scale = std::max({p.z10 / p.R, p.v0, d0 * p.z10});
  const double res1 = -p.z10 / p.R + d0 * z20;
  const double res2 = -p.r * z20 + p.v0 - d0 * p.z10;
  if (std::fabs(res1) > 1e-9 * scale || std::fabs(res2) > 1e-9 * scale) {
    throw BoostError("boost_equilibrium: equilibrium residual too large");
  }
  return {d0, z20};
}

BoostParams with_equilibrium(BoostParams params) {
  if (!(params.C > 0.0 && params.L > 0.0 && params.R > 0.0 && params.r > 0.0 &&
        params.v0 > 0.0 && params.z10 > 0.0 && params.alpha > 0.0)) {
    throw BoostError("boost parameters: C, L, R, r, v0, z10, alpha must be positive");
  }
  if (!(params.beta > 0.0 && params.beta < 1.0)) {
    throw BoostError("boost parameters: beta must lie in (0, 1)");
  }
  const Equilibrium eq = boost_equilibrium(params);
  params.D0 = eq.D0;
  params.z20 = eq.z20;
  return params;
}

double psi_rhs(double psi, double tau, double w1, double rho, const BoostParams& p) {
  const double shifted = psi + p.z20;
  if (!(shifted > kGuard)) {
    throw BoostError("psi_rhs: psi reached -z20 (psi = " + format_double(psi) + ")");
  }
  const double num = p.r * psi * psi + linear_coefficient(w1, p) * psi - p.z20 * w1 +
                     p.z10 * rho * std::cos(tau);
  return num / (p.alpha * p.L * shifted);
}

PsiBounds psi_bounds(double w1, double rho, const BoostParams& p) {
  const double b = linear_coefficient(w1, p);
  const double psi1 = lower_root(b, -p.z20 * w1 + p.z10 * rho, p.r);
  const double psi2 = lower_root(b, -p.z20 * w1 - p.z10 * rho, p.r);
  return {psi1, psi2};
}

double w1_max(const BoostParams& p) { return p.D0 * p.z10 - p.r * p.z20; }

double rho_max(double w1, const BoostParams& p) {
  const double b = linear_coefficient(w1, p);
  return std::min(p.beta * p.D0 * p.z20,
                  b * b / (4.0 * p.r * p.z10) - p.z20 * std::fabs(w1) / p.z10);
}

bool in_domain(double w1, double rho, const BoostParams& p) {
  return std::fabs(w1) < w1_max(p) && rho >= 0.0 && rho < rho_max(w1, p);
}

Orbit integrate_circle(double start, double w1, double rho, const BoostParams& p, int steps) {
  if (steps < 1) throw BoostError("integrate_circle: steps must be positive");
  const double h = kTwoPi / steps;
  Orbit orbit;
  orbit.tau.resize(static_cast<std::size_t>(steps) + 1);
  orbit.psi.resize(static_cast<std::size_t>(steps) + 1);
  double psi = start;
  orbit.tau[0] = 0.0;
  orbit.psi[0] = psi;
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const double k1 = psi_rhs(psi, t, w1, rho, p);
    const double k2 = psi_rhs(psi + 0.5 * h * k1, t + 0.5 * h, w1, rho, p);
    const double k3 = psi_rhs(psi + 0.5 * h * k2, t + 0.5 * h, w1, rho, p);
    const double k4 = psi_rhs(psi + h * k3, t + h, w1, rho, p);
    psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(psi) || !(psi > -p.z20)) {
      throw BoostError("integrate_circle: orbit left the region psi > -z20");
    }
    orbit.tau[static_cast<std::size_t>(k) + 1] = (k + 1) * h;
    orbit.psi[static_cast<std::size_t>(k) + 1] = psi;
  }
  return orbit;
}

PsiSolution solve_psi0(double w1, double rho, const BoostParams& p, const PsiOptions& options) {
  if (options.max_iter < 1) throw BoostError("solve_psi0: max_iter must be positive");
  PsiSolution sol;
  sol.bounds = psi_bounds(w1, rho, p);
  const double tol = options.tol_factor * (1.0 + std::fabs(sol.bounds.psi1));
  double start = 0.5 * (sol.bounds.psi1 + sol.bounds.psi2);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    Orbit orbit = integrate_circle(start, w1, rho, p, options.ode_steps);
    const double end = orbit.psi.back();
    const double mismatch = std::fabs(end - start);
    if (mismatch < tol) {
      sol.psi0 = start;
      sol.iterations = iter;
      sol.mismatch = mismatch;
      orbit.gamma = recover_gamma(orbit, rho, p);
      sol.orbit = std::move(orbit);
      return sol;
    }
    start = end;
  }
  throw BoostError("solve_psi0: no convergence in " + std::to_string(options.max_iter) +
                   " iterations");
}

double recover_gamma(double psi, double tau, double rho, const BoostParams& p) {
  const double shifted = psi + p.z20;
  if (!(shifted > kGuard)) throw BoostError("recover_gamma: psi reached -z20");
  return (rho * std::cos(tau) - p.D0 * psi) / shifted;
}

std::vector<double> recover_gamma(const Orbit& orbit, double rho, const BoostParams& p) {
  std::vector<double> gamma(orbit.psi.size());
  for (std::size_t k = 0; k < orbit.psi.size(); ++k) {
    gamma[k] = recover_gamma(orbit.psi[k], orbit.tau[k], rho, p);
  }
  return gamma;
}

void default_grid_axes(const BoostParams& p, int n_w1, int n_rho, std::vector<double>& w1,
                       std::vector<double>& rho) {
  if (n_w1 < 2 || n_rho < 2) throw BoostError("boost grid: resolutions must be at least 2");
  const double w1_hi = 0.95 * w1_max(p);
  const double rho_hi = 0.95 * p.beta * p.D0 * p.z20;
  w1.resize(static_cast<std::size_t>(n_w1));
  rho.resize(static_cast<std::size_t>(n_rho));
  for (int i = 0; i < n_w1; ++i) {
    // Symmetric construction keeps the middle node at exactly zero.
    const int k = 2 * i - (n_w1 - 1);
    w1[static_cast<std::size_t>(i)] = w1_hi * k / (n_w1 - 1);
  }
  for (int j = 0; j < n_rho; ++j) rho[static_cast<std::size_t>(j)] = rho_hi * j / (n_rho - 1);
}

BoostSolution solve_boost_grid(const BoostParams& params, const std::vector<double>& w1_values,
                               const std::vector<double>& rho_values,
                               const GridOptions& options) {
  BoostSolution sol;
  sol.params = params;
  sol.w1_values = w1_values;
  sol.rho_values = rho_values;
  sol.cells.resize(w1_values.size() * rho_values.size());
  for (std::size_t i = 0; i < w1_values.size(); ++i) {
    for (std::size_t j = 0; j < rho_values.size(); ++j) {
      BoostCell& cell = sol.cells[i * rho_values.size() + j];
      cell.w1 = w1_values[i];
      cell.rho = rho_values[j];
      const double limit = rho_max(cell.w1, params);
      cell.present = std::fabs(cell.w1) < w1_max(params) && limit > 0.0 && cell.rho >= 0.0 &&
                     cell.rho <= 0.95 * limit;
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= sol.cells.size()) return;
      BoostCell& cell = sol.cells[idx];
      if (!cell.present) continue;
      try {
        PsiSolution ps = solve_psi0(cell.w1, cell.rho, params, options.psi);
        cell.converged = true;
        cell.psi0 = ps.psi0;
        cell.iterations = ps.iterations;
        cell.mismatch = ps.mismatch;
        cell.bounds = ps.bounds;
        if (options.keep_orbits) cell.orbit = std::move(ps.orbit);
      } catch (const BoostError& err) {
        cell.error = err.what();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sol.cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return sol;
}

BoostSolution solve_boost_grid(const BoostParams& params, int n_w1, int n_rho,
                               const GridOptions& options) {
  std::vector<double> w1;
  std::vector<double> rho;
  default_grid_axes(params, n_w1, n_rho, w1, rho);
  return solve_boost_grid(params, w1, rho, options);
}

double pde_residual(const BoostSolution& sol) {
  const BoostParams& p = sol.params;
  const std::size_t n_rho = sol.rho_values.size();
  double worst = 0.0;
  bool any = false;
  auto usable = [](const BoostCell& c) { return c.present && c.converged && !c.orbit.psi.empty(); };
  for (std::size_t i = 0; i < sol.w1_values.size(); ++i) {
    for (std::size_t j = 1; j + 1 < n_rho; ++j) {
      const BoostCell& lo = sol.cell(i, j - 1);
      const BoostCell& mid = sol.cell(i, j);
      const BoostCell& hi = sol.cell(i, j + 1);
      if (!usable(lo) || !usable(mid) || !usable(hi) || !(mid.rho > 0.0)) continue;
      const std::size_t m = mid.orbit.psi.size();
      if (m < 3 || lo.orbit.psi.size() != m || hi.orbit.psi.size() != m) continue;
      any = true;
      const std::size_t steps = m - 1;
      const double dtau = kTwoPi / static_cast<double>(steps);
      const double drho = hi.rho - lo.rho;
      const double w1 = mid.w1;
      const double rho = mid.rho;
      const double scale = rho + p.z20 * std::fabs(w1) / p.z10;
      for (std::size_t k = 0; k < steps; ++k) {
        const double tau = mid.orbit.tau[k];
        const double psi = mid.orbit.psi[k];
        const double prev = mid.orbit.psi[k == 0 ? steps - 1 : k - 1];
        const double d_tau = (mid.orbit.psi[k + 1] - prev) / (2.0 * dtau);
        const double d_rho = (hi.orbit.psi[k] - lo.orbit.psi[k]) / drho;
        const double c = std::cos(tau);
        const double s = std::sin(tau);
        const double d_w2 = c * d_rho - s / rho * d_tau;
        const double d_w3 = s * d_rho + c / rho * d_tau;
        const double w2 = rho * c;
        const double w3 = rho * s;
        const double bracket =
            -p.alpha * d_w2 * w3 + p.alpha * d_w3 * w2 - p.r / p.L * psi + w1 / p.L;
        const double lhs = (p.D0 + p.L / p.z10 * bracket) * psi +
                           p.z20 * p.L / p.z10 * bracket - w2;
        worst = std::max(worst, std::fabs(lhs) / scale);
      }
    }
  }
  if (!any) throw BoostError("pde_residual: grid has no cell with both rho neighbours");
  return worst;
}

double psi0_max_second_difference(const BoostSolution& sol) {
  const std::size_t nw = sol.w1_values.size();
  const std::size_t nr = sol.rho_values.size();
  auto ok = [](const BoostCell& c) { return c.present && c.converged; };
  double worst = 0.0;
  for (std::size_t i = 0; i < nw; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      const BoostCell& c = sol.cell(i, j);
      if (!ok(c)) continue;
      if (i > 0 && i + 1 < nw && ok(sol.cell(i - 1, j)) && ok(sol.cell(i + 1, j))) {
        worst = std::max(worst, std::fabs(sol.cell(i - 1, j).psi0 - 2.0 * c.psi0 +
                                          sol.cell(i + 1, j).psi0));
      }
      if (j > 0 && j + 1 < nr && ok(sol.cell(i, j - 1)) && ok(sol.cell(i, j + 1))) {
        worst = std::max(worst, std::fabs(sol.cell(i, j - 1).psi0 - 2.0 * c.psi0 +
                                          sol.cell(i, j + 1).psi0));
      }
    }
  }
  return worst;
}

double first_harmonic_fraction(const std::vector<double>& samples) {
  if (samples.size() < 4) throw BoostError("first_harmonic_fraction: too few samples");
  const std::size_t n = samples.size() - 1;
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean += samples[k];
  mean /= static_cast<double>(n);
  double energy = 0.0;
  std::complex<double> x1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = samples[k] - mean;
    energy += v * v;
    x1 += v * std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }
  if (energy == 0.0) return 0.0;
  // Parseval: sum_k |X_k|^2 = n sum v^2; bins 1 and n-1 carry the first harmonic.
  return 2.0 * std::norm(x1) / (static_cast<double>(n) * energy);
}

void write_grid_csv(std::ostream& os, const BoostSolution& sol) {
  os << "w1,rho,psi0,converged,iters\n";
  for (const BoostCell& c : sol.cells) {
    if (!c.present) continue;
    os << format_double(c.w1) << ',' << format_double(c.rho) << ','
       << format_double(c.converged ? c.psi0 : std::nan("")) << ',' << (c.converged ? 1 : 0)
       << ',' << c.iterations << '\n';
  }
}

void write_orbit_csv(std::ostream& os, const Orbit& orbit) {
  os << "tau,psi,gamma\n";
  for (std::size_t k = 0; k < orbit.psi.size(); ++k) {
    os << format_double(orbit.tau[k]) << ',' << format_double(orbit.psi[k]) << ','
       << format_double(k < orbit.gamma.size() ? orbit.gamma[k] : std::nan("")) << '\n';
  }
}

}  // namespace regsyn
