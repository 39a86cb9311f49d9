#include "regsyn/sim.h"

#include <cmath>
#include <ostream>

namespace regsyn {

DivergenceError::DivergenceError(const std::string& message, double time)
    : Error(message), time_(time) {}

long long step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T >= dt)) throw Error("simulate: need dt > 0 and T >= dt");
  return std::llround(T / dt);
}

namespace {

class ClosedLoop {
 public:
  ClosedLoop(const PlantModel& plant, const ExosystemModel& exo, const ControllerModel* ctrl)
      : n_(ctrl ? plant.n : 0), nc_(ctrl ? ctrl->nc : 0), p_(exo.p) {
    const auto w_names = indexed_names("w", p_);
    s_ = compile_all(exo.s, w_names);
    if (ctrl) {
      const auto slots = plant_slots(plant.n, plant.p);
      f_ = compile_all(plant.f, slots);
      const Expr h = plant.h();
      h_ = CompiledExpr(h, slots);
      const auto xi_names = indexed_names("xi", nc_);
      phi_ = compile_all(ctrl->phi, xi_names);
      lambda_ = CompiledExpr(ctrl->lambda, xi_names);
      bc_ = ctrl->bc;
    }
    slots_.resize(static_cast<std::size_t>(n_ + 1 + p_));
  }

  int size() const { return n_ + nc_ + p_; }

  // Writes the derivative of z into dz and returns (e, u).
  std::pair<double, double> eval(const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
    const double* w = z.data() + n_ + nc_;
    for (int i = 0; i < p_; ++i) dz(n_ + nc_ + i) = s_[static_cast<std::size_t>(i)]({w, static_cast<std::size_t>(p_)});
    if (nc_ == 0) return {0.0, 0.0};
    const std::span<const double> xi(z.data() + n_, static_cast<std::size_t>(nc_));
    const double u = lambda_(xi);
    for (int i = 0; i < n_; ++i) slots_[static_cast<std::size_t>(i)] = z(i);
    slots_[static_cast<std::size_t>(n_)] = u;
    for (int i = 0; i < p_; ++i) slots_[static_cast<std::size_t>(n_ + 1 + i)] = w[i];
    for (int i = 0; i < n_; ++i) dz(i) = f_[static_cast<std::size_t>(i)](slots_);
    const double e = h_(slots_);
    for (int i = 0; i < nc_; ++i) {
      dz(n_ + i) = phi_[static_cast<std::size_t>(i)](xi) + bc_(i) * e;
    }
    return {e, u};
  }

  int n() const { return n_; }
  int nc() const { return nc_; }
  int p() const { return p_; }

 private:
  int n_;
  int nc_;
  int p_;
  std::vector<CompiledExpr> f_;
  CompiledExpr h_;
  std::vector<CompiledExpr> s_;
  std::vector<CompiledExpr> phi_;
  CompiledExpr lambda_;
  Eigen::VectorXd bc_;
  std::vector<double> slots_;
};

Trajectory run(ClosedLoop& loop, Eigen::VectorXd z, double T, double dt,
               const SimOptions& options) {
  if (options.stride < 1) throw Error("simulate: stride must be positive");
  const long long steps = step_count(T, dt);
  const long long rows = steps / options.stride + 1 + (steps % options.stride ? 1 : 0);
  const int n = loop.n();
  const int nc = loop.nc();
  const int p = loop.p();
  const int dim = loop.size();

  Trajectory traj;
  traj.t.resize(rows);
  traj.x.resize(rows, n);
  traj.xi.resize(rows, nc);
  traj.w.resize(rows, p);
  traj.e.resize(rows);
  traj.u.resize(rows);

  Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  Eigen::Index row = 0;
  auto record = [&](double t, const Eigen::VectorXd& state) {
    const auto [e, u] = loop.eval(state, tmp);
    traj.t(row) = t;
    traj.x.row(row) = state.head(n).transpose();
    traj.xi.row(row) = state.segment(n, nc).transpose();
    traj.w.row(row) = state.tail(p).transpose();
    traj.e(row) = e;
    traj.u(row) = u;
    ++row;
  };
  auto check = [&](double t, const Eigen::VectorXd& state) {
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > options.divergence_cap) {
      throw DivergenceError("simulate: state diverged at t = " + format_double(t), t);
    }
  };

  check(0.0, z);
  record(0.0, z);
  for (long long k = 0; k < steps; ++k) {
    loop.eval(z, k1);
    tmp = z + 0.5 * dt * k1;
    loop.eval(tmp, k2);
    tmp = z + 0.5 * dt * k2;
    loop.eval(tmp, k3);
    tmp = z + dt * k3;
    loop.eval(tmp, k4);
    z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = static_cast<double>(k + 1) * dt;
    check(t, z);
    if ((k + 1) % options.stride == 0 || k + 1 == steps) record(t, z);
  }
  return traj;
}

}  // namespace

Trajectory simulate(const PlantModel& plant, const ExosystemModel& exo,
                    const ControllerModel& controller, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& xi0, const Eigen::VectorXd& w0, double T, double dt,
                    const SimOptions& options) {
  if (x0.size() != plant.n || xi0.size() != controller.nc || w0.size() != exo.p ||
      plant.p != exo.p) {
    throw Error("simulate: initial state dimensions do not match the system");
  }
  ClosedLoop loop(plant, exo, &controller);
  Eigen::VectorXd z(loop.size());
  z << x0, xi0, w0;
  return run(loop, z, T, dt, options);
}

Trajectory simulate_exosystem(const ExosystemModel& exo, const Eigen::VectorXd& w0, double T,
                              double dt, const SimOptions& options) {
  if (w0.size() != exo.p) throw Error("simulate_exosystem: w0 has wrong dimension");
  PlantModel unused;
  ClosedLoop loop(unused, exo, nullptr);
  return run(loop, w0, T, dt, options);
}

DecayMetrics decay_metrics(const Trajectory& traj, double window) {
  DecayMetrics m;
  const Eigen::Index rows = traj.rows();
  if (rows == 0) return m;
  const double t0 = traj.t(0);
  const double t1 = traj.t(rows - 1);
  if (!(window > 0.0) || window > t1 - t0 + 1e-12) {
    throw Error("decay_metrics: window must lie in (0, T]");
  }
  double first = 0.0;
  double last = 0.0;
  long first_n = 0;
  long last_n = 0;
  for (Eigen::Index k = 0; k < rows; ++k) {
    const double e = traj.e(k);
    m.peak = std::max(m.peak, std::fabs(e));
    if (traj.t(k) <= t0 + window) {
      first += e * e;
      ++first_n;
    }
    if (traj.t(k) >= t1 - window) {
      last += e * e;
      ++last_n;
    }
  }
  const double first_rms = std::sqrt(first / static_cast<double>(first_n));
  m.final_rms = std::sqrt(last / static_cast<double>(last_n));
  m.settle_fraction = first_rms > 0.0 ? m.final_rms / first_rms : 0.0;
  return m;
}

std::optional<double> detect_period(const Trajectory& traj, double tol) {
  const Eigen::Index rows = traj.rows();
  if (rows < 3) return std::nullopt;
  const Eigen::RowVectorXd w0 = traj.w.row(0);
  auto dist = [&](Eigen::Index k) { return (traj.w.row(k) - w0).norm(); };
  Eigen::Index k = 1;
  while (k < rows && dist(k) < tol) ++k;
  while (k < rows && dist(k) >= tol) ++k;
  if (k >= rows) return std::nullopt;
  Eigen::Index best = k;
  while (k + 1 < rows && dist(k + 1) < tol) {
    ++k;
    if (dist(k) < dist(best)) best = k;
  }
  if (best + 1 >= rows) return traj.t(best);
  const double dt = traj.t(best) - traj.t(best - 1);
  const double dl = dist(best - 1);
  const double dm = dist(best);
  const double dr = dist(best + 1);
  // Two lines of equal and opposite slope through the steeper side.
  if (dl >= dr) {
    const double slope = dl - dm;
    if (!(slope > 0.0)) return traj.t(best);
    return traj.t(best) + dt * (dm - dr + slope) / (2.0 * slope);
  }
  const double slope = dr - dm;
  if (!(slope > 0.0)) return traj.t(best);
  return traj.t(best) - dt * (dm - dl + slope) / (2.0 * slope);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int stride) {
  if (stride < 1) throw Error("write_trajectory_csv: stride must be positive");
  os << 't';
  for (Eigen::Index i = 0; i < traj.x.cols(); ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < traj.xi.cols(); ++i) os << ",xi" << i + 1;
  for (Eigen::Index i = 0; i < traj.w.cols(); ++i) os << ",w" << i + 1;
  os << ",e,u\n";
  std::string line;
  for (Eigen::Index k = 0; k < traj.rows(); ++k) {
    if (k % stride != 0 && k + 1 != traj.rows()) continue;
    line = format_double(traj.t(k));
    for (Eigen::Index i = 0; i < traj.x.cols(); ++i) line += ',' + format_double(traj.x(k, i));
    for (Eigen::Index i = 0; i < traj.xi.cols(); ++i) line += ',' + format_double(traj.xi(k, i));
    for (Eigen::Index i = 0; i < traj.w.cols(); ++i) line += ',' + format_double(traj.w(k, i));
    line += ',' + format_double(traj.e(k)) + ',' + format_double(traj.u(k)) + '\n';
    os << line;
  }
}

}  // namespace regsyn
