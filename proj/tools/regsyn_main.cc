#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "regsyn/commands.h"

namespace {

unsigned env_threads() {
  const char* v = std::getenv("REGSYN_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    const long n = std::stol(v);
    return n > 0 ? static_cast<unsigned>(n) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regsyn: internal-model regulator synthesis for nonlinear SISO plants"};
  app.require_subcommand(1);

  std::string system;

  auto* verify = app.add_subcommand("verify", "check the regulator and immersion conditions");
  verify->add_option("system", system, "system file or built-in example name")->required();
  regsyn::VerifyOptions verify_opts;
  verify->add_option("--samples", verify_opts.samples, "residual sample count");
  verify->add_option("--seed", verify_opts.seed, "residual sample seed");

  auto* synth = app.add_subcommand("synthesize", "compute the stabilizing gain Bc");
  synth->add_option("system", system, "system file or built-in example name")->required();
  regsyn::SynthesizeOptions synth_opts;
  synth->add_option("--eps0", synth_opts.scan.eps0, "initial epsilon");
  synth->add_option("--factor", synth_opts.scan.factor, "epsilon reduction factor");
  synth->add_option("--max-halvings", synth_opts.scan.max_halvings, "maximum reductions");
  synth->add_option("--margin", synth_opts.scan.margin, "required stability margin");
  synth->add_option("--out", synth_opts.out_path, "write the system with the controller");

  auto* sim = app.add_subcommand("simulate", "simulate the closed loop");
  sim->add_option("system", system, "system file or built-in example name")->required();
  regsyn::SimulateOptions sim_opts;
  double T = 0.0, dt = 0.0, window = 0.0;
  std::string ic;
  auto* t_opt = sim->add_option("--T", T, "final time");
  auto* dt_opt = sim->add_option("--dt", dt, "step size");
  auto* ic_opt = sim->add_option("--ic", ic, "initial conditions \"x0;xi0;w0\"");
  auto* window_opt = sim->add_option("--window", window, "metric tail window");
  sim->add_option("--stride", sim_opts.stride, "CSV row stride")->check(CLI::PositiveNumber);
  sim->add_option("--out", sim_opts.out_path, "trajectory CSV");

  auto* boost = app.add_subcommand("boost", "solve the boost converter invariance equation");
  regsyn::BoostOptions boost_opts;
  std::string params;
  int grid_w1 = 0, grid_rho = 0;
  std::vector<std::vector<std::string>> cells;
  auto* params_opt = boost->add_option("--params", params, "file or example with [params]");
  auto* gw_opt = boost->add_option("--grid-w1", grid_w1, "w1 grid points")->check(CLI::PositiveNumber);
  auto* gr_opt = boost->add_option("--grid-rho", grid_rho, "rho grid points")->check(CLI::PositiveNumber);
  boost->add_option("--cell", cells, "solve one cell: w1 rho")->expected(2)->allow_extra_args(false);
  boost->add_option("--out", boost_opts.out_dir, "output directory");

  auto* example = app.add_subcommand("example", "list or print built-in examples");
  std::string action, name;
  example->add_option("action", action, "list or dump")->required();
  example->add_option("name", name, "example name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return regsyn::cmd_verify(regsyn::load_system_or_example(system), std::cout, verify_opts);
    if (*synth) return regsyn::cmd_synthesize(regsyn::load_system_or_example(system), synth_opts, std::cout);
    if (*sim) {
      if (*t_opt) sim_opts.T = T;
      if (*dt_opt) sim_opts.dt = dt;
      if (*ic_opt) sim_opts.ic = ic;
      if (*window_opt) sim_opts.window = window;
      return regsyn::cmd_simulate(regsyn::load_system_or_example(system), sim_opts, std::cout);
    }
    if (*boost) {
      if (*params_opt) boost_opts.params_source = params;
      if (*gw_opt) boost_opts.grid_w1 = grid_w1;
      if (*gr_opt) boost_opts.grid_rho = grid_rho;
      for (const auto& c : cells) boost_opts.cells.emplace_back(c.at(0), c.at(1));
      boost_opts.threads = env_threads();
      return regsyn::cmd_boost(boost_opts, std::cout);
    }
    if (*example) return regsyn::cmd_example(action, name, std::cout);
  } catch (const std::exception& err) {
    std::cerr << "regsyn: " << err.what() << '\n';
    return 2;
  }
  return 2;
}
