#include "regsyn/system_file.h"

#include <gtest/gtest.h>

#include "regsyn/examples.h"

namespace regsyn {
namespace {

constexpr const char* kMinimal = R"(
[plant]
n = 1
f1 = -x1 + u + w1   # trailing comment
g = x1

; full-line comment
[exosystem]
p = 2
s1 = w2
s2 = -w1
)";

std::string error_of(std::string_view text) {
  try {
    parse_system(text, "t.sys");
  } catch (const Error& err) {
    return err.what();
  }
  return "";
}

GTEST_TEST(SystemFileTest, Minimal) {
  const SystemFile sys = parse_system(kMinimal);
  EXPECT_EQ(sys.plant.n, 1);
  EXPECT_EQ(sys.exo.p, 2);
  EXPECT_EQ(to_string(sys.plant.q), "0");
  EXPECT_FALSE(sys.controller);
  EXPECT_FALSE(sys.immersion);
  EXPECT_FALSE(sys.regulator);
  EXPECT_FALSE(sys.simulation.T);
}

GTEST_TEST(SystemFileTest, ParamsAreSubstituted) {
  const SystemFile sys = parse_system(std::string("[params]\nk = 2\nk2 = k^2 + 1\n") + kMinimal +
                                      "[reference]\nq = k2*w1\n");
  ASSERT_TRUE(sys.param("k2"));
  EXPECT_EQ(*sys.param("k2"), 5.0);
  EXPECT_EQ(eval(sys.plant.q, {{"w1", 1.0}}), 5.0);
}

GTEST_TEST(SystemFileTest, ErrorsNameLineAndSection) {
  std::string msg = error_of(std::string(kMinimal) + "[reference]\nq = w1 +\n");
  EXPECT_NE(msg.find("t.sys:13:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("[reference]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;

  msg = error_of(std::string(kMinimal) + "[bogus]\n");
  EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
  msg = error_of("[plant]\nn = 1\nf1 = x1\nf1 = x1\ng = x1\n[exosystem]\np = 1\ns1 = 0\n");
  EXPECT_NE(msg.find("f1"), std::string::npos) << msg;
  msg = error_of("[plant]\nn = 1\nf1 = x1\ng = x1\ncolour = 3\n[exosystem]\np = 1\ns1 = 0\n");
  EXPECT_NE(msg.find("colour"), std::string::npos) << msg;
  EXPECT_NE(error_of("[plant]\nn = 1\nf1 = x1\ng = x1\n"), "");
  EXPECT_NE(error_of(std::string("[params]\nu = 3\n") + kMinimal), "");
  EXPECT_NE(error_of(std::string("[params]\nsin = 3\n") + kMinimal), "");
  EXPECT_NE(error_of(std::string("[params]\na = b\n") + kMinimal), "");
  EXPECT_NE(error_of(std::string(kMinimal) + "[simulation]\nx0 = 1, 2\n"), "");
}

GTEST_TEST(SystemFileTest, ControllerAndSimulation) {
  const SystemFile sys = parse_system(std::string(kMinimal) +
                                      "[controller]\nnc = 2\nphi1 = xi2\nphi2 = -xi1\n"
                                      "lambda = xi1\nBc = 1, -0.5\n"
                                      "[simulation]\nx0 = 1\nxi0 = 0, 0\nw0 = 1, 0\nT = 5\ndt = 1e-3\n");
  ASSERT_TRUE(sys.controller);
  EXPECT_EQ(sys.controller->nc, 2);
  EXPECT_EQ(sys.controller->bc(1), -0.5);
  EXPECT_EQ(*sys.simulation.T, 5.0);
  EXPECT_EQ(*sys.simulation.dt, 1e-3);
  EXPECT_EQ((*sys.simulation.w0)(0), 1.0);
}

GTEST_TEST(SystemFileTest, RenderRoundTrip) {
  for (const auto& name : example_names()) {
    const SystemFile a = parse_system(example_text(name), name);
    const SystemFile b = parse_system(render_sections(a.sections), name);
    ASSERT_EQ(a.plant.f.size(), b.plant.f.size());
    for (std::size_t i = 0; i < a.plant.f.size(); ++i) EXPECT_TRUE(a.plant.f[i] == b.plant.f[i]);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.controller.has_value(), b.controller.has_value());
  }
}

GTEST_TEST(SystemFileTest, WithControllerReplacesSection) {
  const SystemFile sys = parse_system(example_text("example52"), "example52");
  const ControllerModel c =
      make_controller(3, {parse("0"), parse("-2*xi3"), parse("2*xi2")}, parse("xi1 + xi2"),
                      Eigen::Vector3d(1, 2, 3));
  const auto sections = with_controller(sys.sections, c);
  const SystemFile out = parse_system(render_sections(sections), "out");
  ASSERT_TRUE(out.controller);
  EXPECT_EQ(out.controller->bc, Eigen::VectorXd(Eigen::Vector3d(1, 2, 3)));
  // Inserted ahead of [simulation] and kept unique.
  int count = 0;
  std::size_t controller_at = 0, simulation_at = 0;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (sections[i].name == "controller") {
      ++count;
      controller_at = i;
    }
    if (sections[i].name == "simulation") simulation_at = i;
  }
  EXPECT_EQ(count, 1);
  EXPECT_LT(controller_at, simulation_at);
  const auto again = with_controller(sections, c);
  EXPECT_EQ(again.size(), sections.size());
}

GTEST_TEST(SystemFileTest, FormatList) {
  EXPECT_EQ(format_list(Eigen::Vector3d(1, -0.5, 1e-20)), "1, -0.5, 1e-20");
}

GTEST_TEST(SystemFileTest, MissingFile) { EXPECT_THROW(load_system("/nonexistent/x.sys"), Error); }

}  // namespace
}  // namespace regsyn
