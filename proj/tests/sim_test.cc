#include "regsyn/sim.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "regsyn/commands.h"

namespace regsyn {
namespace {

// w' = -w^2 has the closed form w0 / (1 + w0 t).
double riccati_error(double dt) {
  const ExosystemModel exo = make_exosystem(1, {parse("-w1^2")});
  const Trajectory tr = simulate_exosystem(exo, Eigen::VectorXd::Constant(1, 2.0), 1.0, dt);
  return std::fabs(tr.w(tr.rows() - 1, 0) - 2.0 / 3.0);
}

GTEST_TEST(SimTest, Rk4IsFourthOrder) {
  const double ratio = riccati_error(0.02) / riccati_error(0.01);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

GTEST_TEST(SimTest, StepCount) {
  EXPECT_EQ(step_count(1.0, 1e-6), 1000000);
  EXPECT_EQ(step_count(80.0, 1e-4), 800000);
  EXPECT_THROW(step_count(1.0, 0.0), Error);
  EXPECT_THROW(step_count(1e-3, 1e-2), Error);
}

GTEST_TEST(SimTest, HarmonicPeriod) {
  const ExosystemModel exo = make_exosystem(2, {parse("w2"), parse("-2*w1")});
  Eigen::VectorXd w0(2);
  w0 << 1.0, 0.0;
  const Trajectory tr = simulate_exosystem(exo, w0, 10.0, 1e-3);
  const auto period = detect_period(tr, 1e-2);
  ASSERT_TRUE(period);
  EXPECT_NEAR(*period, 2 * std::numbers::pi / std::sqrt(2.0), 1e-4);
}

GTEST_TEST(SimTest, FirstExampleExosystemOrbit) {
  const SystemFile sys = load_system_or_example("example51");
  Eigen::VectorXd w0(2);
  w0 << 0.0, 0.25;
  const Trajectory tr = simulate_exosystem(sys.exo, w0, 40.0, 1e-3);
  const auto period = detect_period(tr, 1e-2);
  ASSERT_TRUE(period);
  // Return distance at the detected period.
  const Trajectory one = simulate_exosystem(sys.exo, w0, *period, *period / 20000);
  EXPECT_LT((one.w.row(one.rows() - 1) - w0.transpose()).norm(), 1e-3);
  EXPECT_LE(tr.w.col(0).cwiseAbs().maxCoeff(), std::pow(0.25, 0.25) + 1e-6);
  EXPECT_NEAR(tr.w.col(1).cwiseAbs().maxCoeff(), 0.25, 1e-6);
}

GTEST_TEST(SimTest, ClosedLoopTracksFeedforward) {
  const SystemFile sys = load_system_or_example("example51");
  const Trajectory tr = simulate(sys.plant, sys.exo, *sys.controller, *sys.simulation.x0,
                                 *sys.simulation.xi0, *sys.simulation.w0, 80.0, 1e-3);
  const DecayMetrics m = decay_metrics(tr, 8.0);
  EXPECT_LE(m.settle_fraction, 0.02);
  EXPECT_DOUBLE_EQ(m.peak, 1.0);
  // On the regulator manifold u equals gamma(w).
  const Eigen::Index last = tr.rows() - 1;
  const double w1 = tr.w(last, 0);
  const double w2 = tr.w(last, 1);
  const double gamma = eval(sys.regulator->gamma, {{"w1", w1}, {"w2", w2}});
  EXPECT_NEAR(tr.u(last), gamma, 1e-3);
  EXPECT_NEAR(tr.x(last, 1), w1, 1e-3);
}

GTEST_TEST(SimTest, Deterministic) {
  const SystemFile sys = load_system_or_example("example51");
  auto run = [&] {
    return simulate(sys.plant, sys.exo, *sys.controller, *sys.simulation.x0, *sys.simulation.xi0,
                    *sys.simulation.w0, 2.0, 1e-3);
  };
  const Trajectory a = run();
  const Trajectory b = run();
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.e, b.e);
}

GTEST_TEST(SimTest, StrideKeepsEndpoints) {
  const SystemFile sys = load_system_or_example("example51");
  SimOptions opt;
  opt.stride = 7;
  const Trajectory tr = simulate(sys.plant, sys.exo, *sys.controller, *sys.simulation.x0,
                                 *sys.simulation.xi0, *sys.simulation.w0, 1.0, 0.01, opt);
  EXPECT_EQ(tr.t(0), 0.0);
  EXPECT_NEAR(tr.t(tr.rows() - 1), 1.0, 1e-12);
  EXPECT_EQ(tr.rows(), 100 / 7 + 2);
}

GTEST_TEST(SimTest, DivergenceIsReported) {
  const PlantModel plant = make_plant(1, 1, {parse("x1 + u")}, parse("x1"), parse("0"));
  const ExosystemModel exo = make_exosystem(1, {parse("0")});
  const ControllerModel c = make_controller(1, {parse("0")}, parse("0*xi1"), Eigen::VectorXd::Zero(1));
  try {
    simulate(plant, exo, c, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1),
             Eigen::VectorXd::Zero(1), 100.0, 0.01);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& err) {
    EXPECT_NEAR(err.time(), std::log(1e6), 0.05);
  }
}

GTEST_TEST(SimTest, CsvLayout) {
  const SystemFile sys = load_system_or_example("example51");
  const Trajectory tr = simulate(sys.plant, sys.exo, *sys.controller, *sys.simulation.x0,
                                 *sys.simulation.xi0, *sys.simulation.w0, 0.02, 0.01);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x1,x2,xi1,xi2,w1,w2,e,u");
  std::getline(is, line);
  EXPECT_EQ(line, "0,1,-1,0,0,0.5,0.25,1,0");
}

}  // namespace
}  // namespace regsyn
