#include "regsyn/commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "regsyn/examples.h"
#include "regsyn/specan.h"

namespace regsyn {
namespace {

bool has_line(const std::string& out, const std::string& prefix) {
  std::istringstream is(out);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("regsyn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

GTEST_TEST(CommandsTest, VerifyExamples) {
  for (const auto& name : example_names()) {
    std::ostringstream out;
    EXPECT_EQ(cmd_verify(load_system_or_example(name), out), 0) << out.str();
    EXPECT_FALSE(has_line(out.str(), "CHECK") && out.str().find(" FAIL ") != std::string::npos);
  }
}

GTEST_TEST(CommandsTest, VerifyReportsFailures) {
  const SystemFile sys = parse_system(
      "[plant]\nn = 1\nf1 = x1 + u\ng = x1\n[exosystem]\np = 1\ns1 = 0\n", "unstable");
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(sys, out), 1);
  EXPECT_TRUE(has_line(out.str(), "CHECK A_hurwitz FAIL")) << out.str();
}

GTEST_TEST(CommandsTest, SynthesizeWritesLoadableController) {
  const auto dir = temp_dir("synth");
  SynthesizeOptions opt;
  opt.out_path = (dir / "ex52.sys").string();
  std::ostringstream out;
  ASSERT_EQ(cmd_synthesize(load_system_or_example("example52"), opt, out), 0) << out.str();
  EXPECT_TRUE(has_line(out.str(), "INFO controller_order 3"));
  const SystemFile sys = load_system(opt.out_path);
  ASSERT_TRUE(sys.controller);
  EXPECT_EQ(sys.controller->nc, 3);
  std::ostringstream vout;
  EXPECT_EQ(cmd_verify(sys, vout), 0) << vout.str();
  EXPECT_TRUE(has_line(vout.str(), "CHECK closed_loop_hurwitz PASS"));
}

GTEST_TEST(CommandsTest, SynthesizeCenterReducesOffAxisImmersion) {
  // The immersion carries a decaying extra mode; synthesis drops it.
  const SystemFile sys = parse_system(R"(
[plant]
n = 1
f1 = -x1 + u + w1
g = x1
[exosystem]
p = 2
s1 = w2
s2 = -w1
[immersion]
nu = 3
tau1 = w1
tau2 = w2
tau3 = 0
phi1 = xi2
phi2 = -xi1
phi3 = -xi3
lambda = -xi1 + xi3
)",
                                      "offaxis");
  std::ostringstream out;
  ASSERT_EQ(cmd_synthesize(sys, {}, out), 0) << out.str();
  EXPECT_TRUE(has_line(out.str(), "INFO center_reduction 3 -> 2")) << out.str();
}

GTEST_TEST(CommandsTest, SynthesizeFailureExitsNonzero) {
  const SystemFile sys = parse_system(
      "[plant]\nn = 1\nf1 = -x1 + u\ng = 0*x1\n[exosystem]\np = 1\ns1 = 0\n", "blind");
  std::ostringstream out;
  EXPECT_EQ(cmd_synthesize(sys, {}, out), 1);
  EXPECT_TRUE(has_line(out.str(), "CHECK synthesis FAIL")) << out.str();
}

GTEST_TEST(CommandsTest, SimulateWritesCsvAndMetrics) {
  const auto dir = temp_dir("sim");
  SimulateOptions opt;
  opt.T = 2.0;
  opt.dt = 1e-3;
  opt.stride = 10;
  opt.ic = "0.5, 0;;0.1, 0";
  opt.out_path = (dir / "traj.csv").string();
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(load_system_or_example("example51"), opt, out), 0);
  EXPECT_TRUE(has_line(out.str(), "METRIC final_rms "));
  EXPECT_TRUE(has_line(out.str(), "METRIC settle_fraction "));
  std::ifstream in(opt.out_path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "t,x1,x2,xi1,xi2,w1,w2,e,u");
  EXPECT_EQ(first.substr(0, 16), "0,0.5,0,0,0,0.1,");

  opt.ic = "1;2";
  EXPECT_THROW(cmd_simulate(load_system_or_example("example51"), opt, out), Error);
}

GTEST_TEST(CommandsTest, SimulateSynthesizesWhenControllerMissing) {
  SimulateOptions opt;
  opt.T = 1.0;
  opt.dt = 1e-3;
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(load_system_or_example("example52"), opt, out), 0);
  EXPECT_TRUE(has_line(out.str(), "INFO synthesized_eps"));
}

GTEST_TEST(CommandsTest, BoostCellsAndParamsFile) {
  const auto dir = temp_dir("boost");
  const auto params = dir / "boost.sys";
  std::ofstream(params) << "[params]\nC = 40e-6\nL = 4e-3\nR = 400\nr = 0.25\nv0 = 100\n"
                           "z10 = 400\nalpha = 200*pi\nbeta = 0.9\n";
  BoostOptions opt;
  opt.params_source = params.string();
  opt.cells = {{"0", "0.3"}, {"-50", "0.3"}};
  opt.out_dir = dir.string();
  std::ostringstream out;
  ASSERT_EQ(cmd_boost(opt, out), 0) << out.str();
  EXPECT_TRUE(has_line(out.str(), "INFO D0 0.2474744871391589"));
  EXPECT_TRUE(std::filesystem::exists(dir / "orbit_0_0.3.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "orbit_-50_0.3.csv"));
  std::ifstream grid(dir / "psi0_grid.csv");
  std::string line;
  int rows = 0;
  while (std::getline(grid, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

GTEST_TEST(CommandsTest, BoostParamsFromExample) {
  BoostOptions opt;
  opt.params_source = "example53";
  opt.grid_w1 = 5;
  opt.grid_rho = 5;
  opt.out_dir = temp_dir("boost_grid").string();
  std::ostringstream out;
  ASSERT_EQ(cmd_boost(opt, out), 0) << out.str();
  EXPECT_TRUE(has_line(out.str(), "CHECK grid_converged PASS"));
}

GTEST_TEST(CommandsTest, ExampleListAndDump) {
  std::ostringstream list;
  EXPECT_EQ(cmd_example("list", "", list), 0);
  EXPECT_EQ(list.str(), "example51\nexample52\nexample53\n");
  std::ostringstream dump;
  EXPECT_EQ(cmd_example("dump", "example53", dump), 0);
  EXPECT_NE(dump.str().find("Bc = 7.5, -0.29, 0.06"), std::string::npos);
  EXPECT_THROW(cmd_example("dump", "nope", dump), Error);
  EXPECT_THROW(cmd_example("frobnicate", "", dump), Error);
}

GTEST_TEST(CommandsTest, DefaultInternalModelPriority) {
  // Immersion first.
  EXPECT_EQ(default_internal_model(load_system_or_example("example52")).nu, 3);
  // Exosystem copy with the regulator feedforward.
  const InternalModel im = default_internal_model(load_system_or_example("example51"));
  EXPECT_EQ(im.nu, 2);
  EXPECT_NEAR(im.Lambda(0), 2.0, 1e-12);
  EXPECT_NEAR(im.Lambda(1), 1.0, 1e-12);
}

}  // namespace
}  // namespace regsyn
