#include "regsyn/model.h"

#include <algorithm>
#include <cmath>

namespace regsyn {

namespace {

constexpr double kOriginTol = 1e-12;

void check_variables(const Expr& e, const std::vector<std::string>& allowed,
                     const std::string& what) {
  for (const std::string& v : e.variables()) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw ModelError(what + ": unexpected variable '" + v + "'");
    }
  }
}

void check_vanishes(const Expr& e, const std::vector<std::string>& vars, const std::string& what) {
  Env env;
  for (const auto& v : vars) env[v] = 0.0;
  double value = 0.0;
  try {
    value = eval(e, env);
  } catch (const EvalError& err) {
    throw ModelError(what + " cannot be evaluated at the origin: " + err.what());
  }
  if (!(std::fabs(value) <= kOriginTol)) {
    throw ModelError(what + " does not vanish at the origin (value " + std::to_string(value) +
                     ")");
  }
}

}  // namespace

std::vector<std::string> indexed_names(const std::string& prefix, int count) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

std::vector<std::string> plant_slots(int n, int p) {
  std::vector<std::string> slots = indexed_names("x", n);
  slots.push_back("u");
  for (auto& w : indexed_names("w", p)) slots.push_back(std::move(w));
  return slots;
}

PlantModel make_plant(int n, int p, std::vector<Expr> f, Expr g, Expr q) {
  if (n < 1) throw ModelError("plant: n must be positive");
  if (p < 1) throw ModelError("plant: p must be positive");
  if (static_cast<int>(f.size()) != n) {
    throw ModelError("plant: expected " + std::to_string(n) + " state equations, got " +
                     std::to_string(f.size()));
  }
  const auto slots = plant_slots(n, p);
  const auto w_names = indexed_names("w", p);
  for (int i = 0; i < n; ++i) {
    const std::string what = "plant f" + std::to_string(i + 1);
    check_variables(f[static_cast<std::size_t>(i)], slots, what);
    check_vanishes(f[static_cast<std::size_t>(i)], slots, what);
  }
  check_variables(g, slots, "plant output g");
  check_vanishes(g, slots, "plant output g");
  check_variables(q, w_names, "reference q");
  check_vanishes(q, w_names, "reference q");
  return PlantModel{n, p, std::move(f), std::move(g), std::move(q)};
}

ExosystemModel make_exosystem(int p, std::vector<Expr> s) {
  if (p < 1) throw ModelError("exosystem: p must be positive");
  if (static_cast<int>(s.size()) != p) {
    throw ModelError("exosystem: expected " + std::to_string(p) + " equations, got " +
                     std::to_string(s.size()));
  }
  const auto w_names = indexed_names("w", p);
  for (int i = 0; i < p; ++i) {
    const std::string what = "exosystem s" + std::to_string(i + 1);
    check_variables(s[static_cast<std::size_t>(i)], w_names, what);
    check_vanishes(s[static_cast<std::size_t>(i)], w_names, what);
  }
  return ExosystemModel{p, std::move(s)};
}

ControllerModel make_controller(int nc, std::vector<Expr> phi, Expr lambda, Eigen::VectorXd bc) {
  if (nc < 1) throw ModelError("controller: nc must be positive");
  if (static_cast<int>(phi.size()) != nc) {
    throw ModelError("controller: expected " + std::to_string(nc) + " equations, got " +
                     std::to_string(phi.size()));
  }
  if (bc.size() != nc) {
    throw ModelError("controller: Bc has length " + std::to_string(bc.size()) + ", expected " +
                     std::to_string(nc));
  }
  const auto xi_names = indexed_names("xi", nc);
  for (int i = 0; i < nc; ++i) {
    const std::string what = "controller phi" + std::to_string(i + 1);
    check_variables(phi[static_cast<std::size_t>(i)], xi_names, what);
    check_vanishes(phi[static_cast<std::size_t>(i)], xi_names, what);
  }
  check_variables(lambda, xi_names, "controller lambda");
  check_vanishes(lambda, xi_names, "controller lambda");
  return ControllerModel{nc, std::move(phi), std::move(lambda), std::move(bc)};
}

Eigen::MatrixXd jacobian(const std::vector<Expr>& map, const Eigen::VectorXd& point,
                         const std::vector<std::string>& vars) {
  if (point.size() != static_cast<Eigen::Index>(vars.size())) {
    throw ModelError("jacobian: point and variable list differ in length");
  }
  Env env;
  for (std::size_t j = 0; j < vars.size(); ++j) env[vars[j]] = point[static_cast<Eigen::Index>(j)];
  const Eigen::Index m = static_cast<Eigen::Index>(map.size());
  Eigen::MatrixXd jac(m, point.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < point.size(); ++j) {
      try {
        jac(i, j) = derivative(map[static_cast<std::size_t>(i)], env, vars[static_cast<std::size_t>(j)]);
      } catch (const EvalError& err) {
        throw ModelError("jacobian: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         "): " + err.what());
      }
    }
  }
  return jac;
}

LinearizedData linearize(const PlantModel& plant, const ExosystemModel& exo) {
  if (plant.p != exo.p) throw ModelError("linearize: plant and exosystem disagree on p");
  const int n = plant.n;
  const int p = plant.p;
  const auto slots = plant_slots(n, p);
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n + 1 + p);

  const Eigen::MatrixXd jf = jacobian(plant.f, origin, slots);
  const Eigen::MatrixXd jh = jacobian({plant.h()}, origin, slots);
  const Eigen::MatrixXd js = jacobian(exo.s, Eigen::VectorXd::Zero(p),
                                              indexed_names("w", p));

  LinearizedData lin;
  lin.A = jf.leftCols(n);
  lin.B = jf.col(n);
  lin.P = jf.rightCols(p);
  lin.C = jh.leftCols(n);
  lin.D = jh(0, n);
  lin.Q = jh.rightCols(p);
  lin.S = js;
  return lin;
}

}  // namespace regsyn
