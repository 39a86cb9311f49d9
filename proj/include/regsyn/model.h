#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regsyn/expr.h"

namespace regsyn {

class ModelError : public Error {
 public:
  using Error::Error;
};

// Variable naming used throughout: plant state x1..xn, input u, exosystem
// state w1..wp, controller state xi1..xinc.
std::vector<std::string> indexed_names(const std::string& prefix, int count);

// Slot order used to evaluate plant maps: x1..xn, u, w1..wp.
std::vector<std::string> plant_slots(int n, int p);

// x' = f(x, u, w), y = g(x, u, w), y_r = q(w); the tracking error is
// h = g - q.
struct PlantModel {
  int n = 0;
  int p = 0;
  std::vector<Expr> f;
  Expr g;
  Expr q;

  Expr h() const { return g - q; }
};

// w' = s(w).
struct ExosystemModel {
  int p = 0;
  std::vector<Expr> s;
};

// xi' = phi(xi) + Bc e, u = lambda(xi).
struct ControllerModel {
  int nc = 0;
  std::vector<Expr> phi;
  Expr lambda;
  Eigen::VectorXd bc;
};

// Validating constructors. Each checks variable usage and that the maps
// vanish at the origin (to 1e-12).
PlantModel make_plant(int n, int p, std::vector<Expr> f, Expr g, Expr q);
ExosystemModel make_exosystem(int p, std::vector<Expr> s);
ControllerModel make_controller(int nc, std::vector<Expr> phi, Expr lambda, Eigen::VectorXd bc);

// Local linearization at (x, u, w) = (0, 0, 0).
struct LinearizedData {
  Eigen::MatrixXd A;     // n x n
  Eigen::VectorXd B;     // n
  Eigen::MatrixXd P;     // n x p
  Eigen::RowVectorXd C;  // 1 x n
  double D = 0.0;
  Eigen::RowVectorXd Q;  // 1 x p
  Eigen::MatrixXd S;     // p x p

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(S.rows()); }
};

// Jacobian of `map` with respect to `vars` at `point`, by forward-mode
// differentiation. Evaluation failures are rethrown as ModelError naming the
// entry (i, j).
Eigen::MatrixXd jacobian(const std::vector<Expr>& map, const Eigen::VectorXd& point,
                         const std::vector<std::string>& vars);

LinearizedData linearize(const PlantModel& plant, const ExosystemModel& exo);

}  // namespace regsyn
