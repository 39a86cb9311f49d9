#include "regsyn/regeq.h"

#include <cmath>
#include <random>
#include <sstream>

namespace regsyn {

namespace {

constexpr double kOriginTol = 1e-12;

std::string format_point(const Eigen::VectorXd& w) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < w.size(); ++i) os << (i ? ", " : "") << w(i);
  os << ")";
  return os.str();
}

Env w_env(const Eigen::VectorXd& w) {
  Env env;
  for (Eigen::Index i = 0; i < w.size(); ++i) env["w" + std::to_string(i + 1)] = w(i);
  return env;
}

void check_map(const std::vector<Expr>& exprs, const std::vector<std::string>& allowed,
               const std::string& what) {
  Env origin;
  for (const auto& name : allowed) origin[name] = 0.0;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    const std::string label = what + "[" + std::to_string(i + 1) + "]";
    for (const auto& v : exprs[i].variables()) {
      if (!origin.count(v)) throw ModelError(label + ": unexpected variable '" + v + "'");
    }
    double value = 0.0;
    try {
      value = eval(exprs[i], origin);
    } catch (const EvalError& err) {
      throw ModelError(label + " cannot be evaluated at the origin: " + err.what());
    }
    if (!(std::fabs(value) <= kOriginTol)) {
      throw ModelError(label + " does not vanish at the origin");
    }
  }
}

}  // namespace

RegulatorSolution make_regulator_solution(int n, int p, std::vector<Expr> pi, Expr gamma,
                                          double radius) {
  if (static_cast<int>(pi.size()) != n) {
    throw ModelError("regulator solution: expected " + std::to_string(n) + " pi components");
  }
  if (!(radius > 0.0)) throw ModelError("regulator solution: radius must be positive");
  const auto w_names = indexed_names("w", p);
  check_map(pi, w_names, "pi");
  check_map({gamma}, w_names, "gamma");
  return RegulatorSolution{std::move(pi), std::move(gamma), radius};
}

ImmersionMap make_immersion(int p, std::vector<Expr> tau, std::vector<Expr> phi, Expr lambda) {
  if (tau.empty() || tau.size() != phi.size()) {
    throw ModelError("immersion: tau and phi must have the same positive length");
  }
  check_map(tau, indexed_names("w", p), "tau");
  const auto xi_names = indexed_names("xi", static_cast<int>(phi.size()));
  check_map(phi, xi_names, "phi");
  check_map({lambda}, xi_names, "lambda");
  return ImmersionMap{std::move(tau), std::move(phi), std::move(lambda)};
}

std::vector<Eigen::VectorXd> sample_ball(int dim, double radius, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    const double norm = v.norm();
    const double r = radius * std::pow(uniform(rng), 1.0 / dim);
    out.push_back(norm > 0.0 ? Eigen::VectorXd(v * (r / norm)) : Eigen::VectorXd::Zero(dim));
  }
  return out;
}

ResidualPair regulator_residual(const RegulatorSolution& sol, const PlantModel& plant,
                                const ExosystemModel& exo,
                                const std::vector<Eigen::VectorXd>& samples) {
  if (static_cast<int>(sol.pi.size()) != plant.n || plant.p != exo.p) {
    throw ModelError("regulator_residual: dimension mismatch");
  }
  const int n = plant.n;
  const int p = plant.p;
  const auto w_names = indexed_names("w", p);
  const Expr h = plant.h();
  ResidualPair worst;
  for (const Eigen::VectorXd& w : samples) {
    if (w.size() != p) throw ModelError("regulator_residual: sample has wrong dimension");
    if (w.norm() > sol.radius * (1.0 + 1e-12)) {
      throw ModelError("regulator_residual: sample " + format_point(w) +
                       " lies outside the solution domain");
    }
    try {
      Env env = w_env(w);
      Eigen::VectorXd sw(p);
      for (int i = 0; i < p; ++i) sw(i) = eval(exo.s[static_cast<std::size_t>(i)], env);
      const Eigen::MatrixXd dpi = jacobian(sol.pi, w, w_names);
      const Eigen::VectorXd lhs = dpi * sw;
      for (int i = 0; i < n; ++i) {
        env["x" + std::to_string(i + 1)] = eval(sol.pi[static_cast<std::size_t>(i)], env);
      }
      env["u"] = eval(sol.gamma, env);
      for (int i = 0; i < n; ++i) {
        const double fi = eval(plant.f[static_cast<std::size_t>(i)], env);
        worst.state = std::max(worst.state, std::fabs(lhs(i) - fi));
      }
      worst.output = std::max(worst.output, std::fabs(eval(h, env)));
    } catch (const Error& err) {
      throw ModelError("regulator_residual at w = " + format_point(w) + ": " + err.what());
    }
  }
  return worst;
}

ResidualPair immersion_residual(const ImmersionMap& im, const ExosystemModel& exo,
                                const Expr& gamma, const std::vector<Eigen::VectorXd>& samples) {
  const int p = exo.p;
  const int nu = static_cast<int>(im.tau.size());
  const auto w_names = indexed_names("w", p);
  ResidualPair worst;
  for (const Eigen::VectorXd& w : samples) {
    if (w.size() != p) throw ModelError("immersion_residual: sample has wrong dimension");
    try {
      const Env env = w_env(w);
      Eigen::VectorXd sw(p);
      for (int i = 0; i < p; ++i) sw(i) = eval(exo.s[static_cast<std::size_t>(i)], env);
      const Eigen::VectorXd lhs = jacobian(im.tau, w, w_names) * sw;
      Env xi_env;
      for (int i = 0; i < nu; ++i) {
        xi_env["xi" + std::to_string(i + 1)] = eval(im.tau[static_cast<std::size_t>(i)], env);
      }
      for (int i = 0; i < nu; ++i) {
        const double rhs = eval(im.phi[static_cast<std::size_t>(i)], xi_env);
        worst.state = std::max(worst.state, std::fabs(lhs(i) - rhs));
      }
      worst.output =
          std::max(worst.output, std::fabs(eval(gamma, env) - eval(im.lambda, xi_env)));
    } catch (const Error& err) {
      throw ModelError("immersion_residual at w = " + format_point(w) + ": " + err.what());
    }
  }
  return worst;
}

}  // namespace regsyn
