#pragma once

#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

#include "regsyn/model.h"

namespace regsyn {

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, double time);
  double time() const { return time_; }

 private:
  double time_;
};

// Rows are time samples. x and xi are empty for exosystem-only runs.
struct Trajectory {
  Eigen::VectorXd t;
  Eigen::MatrixXd x;
  Eigen::MatrixXd xi;
  Eigen::MatrixXd w;
  Eigen::VectorXd e;
  Eigen::VectorXd u;

  Eigen::Index rows() const { return t.size(); }
};

struct SimOptions {
  // Keep every stride-th step (the final step is always kept).
  int stride = 1;
  double divergence_cap = 1e6;
};

// Number of RK4 steps for horizon T and step dt.
long long step_count(double T, double dt);

// Classical RK4 on x' = f(x, lambda(xi), w), xi' = phi(xi) + Bc h(x, lambda(xi), w),
// w' = s(w). Throws DivergenceError once |state|_inf exceeds the cap.
Trajectory simulate(const PlantModel& plant, const ExosystemModel& exo,
                    const ControllerModel& controller, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& xi0, const Eigen::VectorXd& w0, double T, double dt,
                    const SimOptions& options = {});

struct DecayMetrics {
  double final_rms = 0.0;
  double peak = 0.0;
  double settle_fraction = 0.0;
};

// RMS of e over the last and first `window` seconds, and peak |e|.
DecayMetrics decay_metrics(const Trajectory& traj, double window);

Trajectory simulate_exosystem(const ExosystemModel& exo, const Eigen::VectorXd& w0, double T,
                              double dt, const SimOptions& options = {});

// First return of w(t) to within tol of w(0) after leaving that ball,
// refined by fitting a V to the distance samples around the closest one.
std::optional<double> detect_period(const Trajectory& traj, double tol);

// Header t,x1..xn,xi1..xinc,w1..wp,e,u; every stride-th row.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int stride = 1);

}  // namespace regsyn
