#include "regsyn/regeq.h"

#include <gtest/gtest.h>

#include "regsyn/commands.h"

namespace regsyn {
namespace {

GTEST_TEST(RegeqTest, SampleBallIsDeterministicAndBounded) {
  const auto a = sample_ball(3, 0.3, 100, 42);
  const auto b = sample_ball(3, 0.3, 100, 42);
  ASSERT_EQ(a.size(), 100u);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    max_norm = std::max(max_norm, a[i].norm());
  }
  EXPECT_LE(max_norm, 0.3);
  EXPECT_GT(max_norm, 0.2);
  EXPECT_NE(sample_ball(3, 0.3, 1, 43)[0], a[0]);
}

GTEST_TEST(RegeqTest, SecondExampleSolvesRegulatorEquations) {
  const SystemFile sys = load_system_or_example("example52");
  ASSERT_TRUE(sys.regulator && sys.immersion);
  const auto samples = sample_ball(2, 0.3, 100, 1);
  const ResidualPair r = regulator_residual(*sys.regulator, sys.plant, sys.exo, samples);
  EXPECT_LE(r.state, 1e-6);
  EXPECT_LE(r.output, 1e-6);
  const ResidualPair ri = immersion_residual(*sys.immersion, sys.exo, sys.regulator->gamma, samples);
  EXPECT_LE(ri.state, 1e-6);
  EXPECT_LE(ri.output, 1e-6);
}

GTEST_TEST(RegeqTest, FirstExampleSolvesRegulatorEquations) {
  const SystemFile sys = load_system_or_example("example51");
  const auto samples = sample_ball(2, 0.3, 100, 2);
  const ResidualPair r = regulator_residual(*sys.regulator, sys.plant, sys.exo, samples);
  EXPECT_LE(r.state, 1e-6);
  EXPECT_LE(r.output, 1e-6);
}

GTEST_TEST(RegeqTest, CorruptedSolutionIsDetected) {
  const SystemFile sys = load_system_or_example("example52");
  const auto samples = sample_ball(2, 0.3, 100, 3);
  RegulatorSolution bad = *sys.regulator;
  bad.gamma = parse("w1^2 + 2.1*w1*w2");
  EXPECT_GT(regulator_residual(bad, sys.plant, sys.exo, samples).state, 1e-4);
  bad = *sys.regulator;
  bad.pi[0] = parse("0.01*w1");
  EXPECT_GT(regulator_residual(bad, sys.plant, sys.exo, samples).output, 1e-4);
  ImmersionMap im = *sys.immersion;
  im.lambda = parse("0.5*xi1 + xi2 + 0.4*xi3");
  EXPECT_GT(immersion_residual(im, sys.exo, sys.regulator->gamma, samples).output, 1e-4);
}

GTEST_TEST(RegeqTest, SamplesOutsideRadiusAreRejected) {
  const SystemFile sys = load_system_or_example("example52");
  const auto samples = sample_ball(2, 0.5, 20, 4);
  EXPECT_THROW(regulator_residual(*sys.regulator, sys.plant, sys.exo, samples), Error);
}

GTEST_TEST(RegeqTest, ValidatesVariables) {
  EXPECT_THROW(make_regulator_solution(1, 1, {parse("x1")}, parse("w1"), 0.3), Error);
  EXPECT_THROW(make_regulator_solution(1, 1, {parse("w1")}, parse("w2"), 0.3), Error);
  EXPECT_THROW(make_immersion(1, {parse("w1")}, {parse("xi2")}, parse("xi1")), Error);
  EXPECT_NO_THROW(make_immersion(1, {parse("w1")}, {parse("0")}, parse("xi1")));
}

}  // namespace
}  // namespace regsyn
