#include "regsyn/commands.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "regsyn/examples.h"
#include "regsyn/regeq.h"
#include "regsyn/sim.h"
#include "regsyn/specan.h"

namespace regsyn {

namespace {

class CheckPrinter {
 public:
  explicit CheckPrinter(std::ostream& out) : out_(out) {}

  void check(const std::string& name, bool pass, const std::string& value) {
    out_ << "CHECK " << name << (pass ? " PASS " : " FAIL ") << value << '\n';
    if (!pass) failed_ = true;
  }
  void check(const std::string& name, bool pass, double value) {
    check(name, pass, format_double(value));
  }
  void info(const std::string& name, const std::string& value) {
    out_ << "INFO " << name << ' ' << value << '\n';
  }
  bool failed() const { return failed_; }

 private:
  std::ostream& out_;
  bool failed_ = false;
};

std::string format_complex(Complex z) {
  return format_double(z.real()) + ' ' + format_double(z.imag());
}

std::map<std::string, std::string, std::less<>> w_to_xi(int p) {
  std::map<std::string, std::string, std::less<>> names;
  for (int i = 1; i <= p; ++i) names["w" + std::to_string(i)] = "xi" + std::to_string(i);
  return names;
}

Eigen::MatrixXd combined_matrix(const LinearizedData& lin) {
  const Eigen::Index n = lin.A.rows();
  const Eigen::Index p = lin.S.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + p, n + p);
  m.topLeftCorner(n, n) = lin.A;
  m.topRightCorner(n, p) = lin.P;
  m.bottomRightCorner(p, p) = lin.S;
  return m;
}

std::string write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  os << content;
  if (!os) throw Error("error writing '" + path + "'");
  return path;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(eval(parse(item), Env{}));
    } catch (const Error& err) {
      throw Error(what + ": " + err.what());
    }
  }
  return out;
}

double parse_scalar(const std::string& text, const std::string& what) {
  try {
    return eval(parse(text), Env{});
  } catch (const Error& err) {
    throw Error(what + ": " + err.what());
  }
}

std::string cell_label(const std::string& w1, const std::string& rho) {
  return "orbit_" + w1 + "_" + rho + ".csv";
}

}  // namespace

SystemFile load_system_or_example(const std::string& path_or_name) {
  if (is_example(path_or_name)) return parse_system(example_text(path_or_name), path_or_name);
  return load_system(path_or_name);
}

InternalModel default_internal_model(const SystemFile& sys) {
  if (sys.immersion) return internal_model_from_maps(sys.immersion->phi, sys.immersion->lambda);
  std::vector<Expr> phi;
  const auto names = w_to_xi(sys.exo.p);
  for (const Expr& s : sys.exo.s) phi.push_back(s.rename(names));
  if (sys.regulator) return internal_model_from_maps(std::move(phi), sys.regulator->gamma.rename(names));
  const LinearRegulator reg = solve_linear_regulator(linearize(sys.plant, sys.exo));
  return internal_model_from_maps(std::move(phi), linear_map_exprs(reg.Gamma, "xi").front());
}

int cmd_verify(const SystemFile& sys, std::ostream& out, const VerifyOptions& options) {
  CheckPrinter pr(out);
  const LinearizedData lin = linearize(sys.plant, sys.exo);

  const double a_abscissa = spectral_abscissa(lin.A);
  pr.check("A_hurwitz", a_abscissa < 0.0, a_abscissa);

  const Spectrum s_spec = eigen(lin.S);
  double s_offset = 0.0;
  for (const Complex& z : s_spec.raw) s_offset = std::max(s_offset, std::fabs(z.real()));
  pr.check("exosystem_spectrum_on_axis", s_offset <= 1e-7 * (1.0 + inf_norm(lin.S)), s_offset);

  Eigen::RowVectorXd cq(lin.n() + lin.p());
  cq << lin.C, lin.Q;
  const bool combined = hautus_detectable(cq, combined_matrix(lin));
  if (sys.immersion) {
    // With an immersion the internal model replaces the exosystem copy, so
    // the combined pair is informative only.
    pr.info("combined_detectable", combined ? "1" : "0");
  } else {
    pr.check("combined_detectable", combined, combined ? "1" : "0");
  }

  try {
    const LinearRegulator reg = solve_linear_regulator(lin);
    const double res = std::max(reg.residual_state, reg.residual_output);
    pr.check("linear_regulator", true, res);
    pr.info("Gamma", format_list(reg.Gamma.transpose()));
  } catch (const SynthesisError& err) {
    pr.check("linear_regulator", false, "singular");
  }

  InternalModel im = sys.controller ? internal_model_from_controller(*sys.controller)
                                    : default_internal_model(sys);
  const VerificationFlags flags = verify_conditions(lin, im);
  pr.info("internal_model_order", std::to_string(im.nu));
  pr.check("internal_model_detectable", flags.detectable, flags.detectable ? "1" : "0");
  if (!flags.spectrum_on_axis) {
    const CenterProjector cp = center_projector(im.Phi);
    pr.info("internal_model_reduction", "off-axis spectrum; center reduction to order " +
                                            std::to_string(cp.order()));
  }

  std::vector<Complex> points;
  auto add_point = [&](Complex z, double band) {
    if (std::fabs(z.real()) > band) return;
    const Complex p(0.0, z.imag());
    for (const Complex& q : points) {
      if (std::abs(q - p) <= 1e-9 * (1.0 + std::abs(p))) return;
    }
    points.push_back(p);
  };
  for (const Complex& z : s_spec.values) add_point(z, 1e-7 * (1.0 + inf_norm(lin.S)));
  for (const Complex& z : eigen(im.Phi).values) add_point(z, 1e-7 * (1.0 + inf_norm(im.Phi)));
  for (const Complex& z : points) {
    const std::string name = "G(i*" + format_double(z.imag()) + ")";
    try {
      const Complex g = transfer_function(lin, z);
      pr.info(name, format_complex(g));
      pr.check(name + "_nonzero", std::abs(g) > 1e-9, std::abs(g));
    } catch (const SpectralError&) {
      pr.check(name + "_nonzero", false, "undefined");
    }
  }

  if (im.bc) {
    const double cl = spectral_abscissa(closed_loop_matrix(lin, im));
    pr.check("closed_loop_hurwitz", cl < 0.0, cl);
  }

  if (sys.regulator) {
    const auto samples = sample_ball(sys.exo.p, sys.regulator->radius, options.samples, options.seed);
    const ResidualPair r = regulator_residual(*sys.regulator, sys.plant, sys.exo, samples);
    pr.check("regulator_state_residual", r.state <= options.residual_tol, r.state);
    pr.check("regulator_output_residual", r.output <= options.residual_tol, r.output);
    if (sys.immersion) {
      const ResidualPair ri = immersion_residual(*sys.immersion, sys.exo, sys.regulator->gamma, samples);
      pr.check("immersion_state_residual", ri.state <= options.residual_tol, ri.state);
      pr.check("immersion_output_residual", ri.output <= options.residual_tol, ri.output);
    }
  } else if (sys.immersion) {
    pr.info("immersion_residual", "skipped: no [regulator_solution] gamma");
  }
  return pr.failed() ? 1 : 0;
}

SynthesisOutcome synthesize_controller(const SystemFile& sys, const SynthesisOptions& options) {
  const LinearizedData lin = linearize(sys.plant, sys.exo);
  InternalModel im = default_internal_model(sys);
  SynthesisOutcome outcome;
  const VerificationFlags flags = verify_conditions(lin, im);
  if (flags.ok() && !flags.spectrum_on_axis) {
    outcome.reduced_from = im.nu;
    im = center_reduce(im);
  }
  outcome.report = synthesize(lin, im, options);
  if (!outcome.report.success) {
    throw SynthesisError("no stabilizing epsilon found after " +
                         std::to_string(outcome.report.attempts) + " attempts (last abscissa " +
                         format_double(outcome.report.abscissa) + ")");
  }
  im.bc = outcome.report.bc;
  outcome.controller = to_controller(im);
  return outcome;
}

int cmd_synthesize(const SystemFile& sys, const SynthesizeOptions& options, std::ostream& out) {
  CheckPrinter pr(out);
  SynthesisOutcome outcome;
  try {
    outcome = synthesize_controller(sys, options.scan);
  } catch (const SynthesisError& err) {
    pr.check("synthesis", false, std::string("0 ") + err.what());
    return 1;
  }
  const SynthesisReport& rep = outcome.report;
  if (outcome.reduced_from) {
    pr.info("center_reduction", std::to_string(outcome.reduced_from) + " -> " +
                                    std::to_string(outcome.controller.nc));
  }
  pr.info("controller_order", std::to_string(outcome.controller.nc));
  pr.info("eps", format_double(rep.eps));
  pr.info("attempts", std::to_string(rep.attempts));
  for (std::size_t j = 0; j < rep.jordan.blocks.size(); ++j) {
    const JordanBlock& blk = rep.jordan.blocks[j];
    for (std::size_t k = 0; k < rep.coefficients[j].size(); ++k) {
      pr.info("a[" + format_double(blk.alpha) + "][" + std::to_string(k + 1) + "]",
              format_complex(rep.coefficients[j][k]));
    }
  }
  pr.info("Bc", format_list(rep.bc));
  pr.check("synthesis", rep.abscissa < 0.0, rep.abscissa);
  if (!options.out_path.empty()) {
    write_file(options.out_path, render_sections(with_controller(sys.sections, outcome.controller)));
    pr.info("written", options.out_path);
  }
  return pr.failed() ? 1 : 0;
}

int cmd_simulate(const SystemFile& sys, const SimulateOptions& options, std::ostream& out) {
  CheckPrinter pr(out);
  ControllerModel controller;
  if (sys.controller) {
    controller = *sys.controller;
  } else {
    const SynthesisOutcome outcome = synthesize_controller(sys, SynthesisOptions{});
    controller = outcome.controller;
    pr.info("synthesized_eps", format_double(outcome.report.eps));
  }
  pr.info("controller_order", std::to_string(controller.nc));

  Eigen::VectorXd x0 = sys.simulation.x0.value_or(Eigen::VectorXd::Zero(sys.plant.n));
  Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(controller.nc);
  if (sys.simulation.xi0 && sys.simulation.xi0->size() == controller.nc) xi0 = *sys.simulation.xi0;
  Eigen::VectorXd w0 = sys.simulation.w0.value_or(Eigen::VectorXd::Zero(sys.exo.p));
  if (options.ic) {
    std::vector<std::string> parts;
    std::stringstream ss(*options.ic);
    std::string part;
    while (std::getline(ss, part, ';')) parts.push_back(part);
    if (parts.size() != 3) throw Error("--ic expects three ';'-separated lists: x0;xi0;w0");
    auto apply = [](const std::string& text, Eigen::VectorXd& target, const char* what) {
      if (text.find_first_not_of(" \t") == std::string::npos) return;
      const std::vector<double> v = parse_number_list(text, what);
      if (static_cast<Eigen::Index>(v.size()) != target.size()) {
        throw Error(std::string("--ic: ") + what + " needs " + std::to_string(target.size()) +
                    " entries");
      }
      target = Eigen::Map<const Eigen::VectorXd>(v.data(), target.size());
    };
    apply(parts[0], x0, "x0");
    apply(parts[1], xi0, "xi0");
    apply(parts[2], w0, "w0");
  }
  const double T = options.T.value_or(sys.simulation.T.value_or(10.0));
  const double dt = options.dt.value_or(sys.simulation.dt.value_or(1e-4));
  const double window = options.window.value_or(T / 10.0);

  SimOptions sim_options;
  sim_options.stride = options.stride;
  const Trajectory traj = simulate(sys.plant, sys.exo, controller, x0, xi0, w0, T, dt, sim_options);
  const DecayMetrics m = decay_metrics(traj, window);
  out << "METRIC final_rms " << format_double(m.final_rms) << '\n';
  out << "METRIC peak " << format_double(m.peak) << '\n';
  out << "METRIC settle_fraction " << format_double(m.settle_fraction) << '\n';
  if (!options.out_path.empty()) {
    std::ofstream os(options.out_path);
    if (!os) throw Error("cannot write '" + options.out_path + "'");
    write_trajectory_csv(os, traj);
    pr.info("written", options.out_path);
  }
  return 0;
}

BoostParams boost_params_from(const std::vector<std::pair<std::string, double>>& params) {
  std::map<std::string, double> m(params.begin(), params.end());
  auto get = [&](const char* key) {
    const auto it = m.find(key);
    if (it == m.end()) throw BoostError(std::string("boost parameters: missing '") + key + "'");
    return it->second;
  };
  BoostParams p;
  p.C = get("C");
  p.L = get("L");
  p.R = get("R");
  p.r = get("r");
  p.v0 = get("v0");
  p.z10 = get("z10");
  p.alpha = get("alpha");
  p.beta = get("beta");
  return with_equilibrium(p);
}

int cmd_boost(const BoostOptions& options, std::ostream& out) {
  CheckPrinter pr(out);
  BoostParams params = default_boost_params();
  if (options.params_source) {
    const std::string& src = *options.params_source;
    std::vector<RawSection> sections;
    if (is_example(src)) {
      sections = parse_sections(example_text(src), src);
    } else {
      std::ifstream in(src);
      if (!in) throw Error("cannot open '" + src + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      sections = parse_sections(buf.str(), src);
    }
    params = boost_params_from(evaluate_params(sections, src));
  }
  pr.info("D0", format_double(params.D0));
  pr.info("z20", format_double(params.z20));
  pr.info("w1max", format_double(w1_max(params)));

  std::filesystem::create_directories(options.out_dir);
  const std::filesystem::path dir(options.out_dir);
  const bool grid = options.grid_w1 || options.grid_rho || options.cells.empty();
  GridOptions grid_options;
  grid_options.threads = options.threads;

  if (grid) {
    const BoostSolution sol = solve_boost_grid(params, options.grid_w1.value_or(21),
                                               options.grid_rho.value_or(21), grid_options);
    int present = 0;
    int converged = 0;
    for (const BoostCell& c : sol.cells) {
      if (!c.present) continue;
      ++present;
      if (c.converged) {
        ++converged;
      } else {
        out << "FAILED cell " << format_double(c.w1) << ' ' << format_double(c.rho) << ": "
            << c.error << '\n';
      }
    }
    pr.info("cells", std::to_string(present) + " present, " + std::to_string(converged) +
                         " converged");
    pr.check("grid_converged", converged == present, present - converged);
    try {
      const double res = pde_residual(sol);
      pr.check("pde_residual", res <= options.residual_tol, res);
    } catch (const BoostError& err) {
      pr.info("pde_residual", std::string("skipped: ") + err.what());
    }
    const std::string path = (dir / "psi0_grid.csv").string();
    std::ofstream os(path);
    if (!os) throw Error("cannot write '" + path + "'");
    write_grid_csv(os, sol);
    pr.info("written", path);
  }

  if (!options.cells.empty()) {
    BoostSolution cells;
    cells.params = params;
    for (const auto& [w1_text, rho_text] : options.cells) {
      const double w1 = parse_scalar(w1_text, "--cell w1");
      const double rho = parse_scalar(rho_text, "--cell rho");
      BoostCell cell;
      cell.w1 = w1;
      cell.rho = rho;
      cell.present = true;
      const std::string name = "cell(" + w1_text + "," + rho_text + ")";
      try {
        PsiSolution ps = solve_psi0(w1, rho, params);
        cell.converged = true;
        cell.psi0 = ps.psi0;
        cell.iterations = ps.iterations;
        pr.check(name, true, ps.psi0);
        pr.info(name + "_first_harmonic", format_double(first_harmonic_fraction(ps.orbit.psi)));
        const std::string path = (dir / cell_label(w1_text, rho_text)).string();
        std::ofstream os(path);
        if (!os) throw Error("cannot write '" + path + "'");
        write_orbit_csv(os, ps.orbit);
        pr.info("written", path);
      } catch (const BoostError& err) {
        pr.check(name, false, std::string("nan ") + err.what());
      }
      cells.cells.push_back(std::move(cell));
    }
    if (!grid) {
      std::sort(cells.cells.begin(), cells.cells.end(), [](const BoostCell& a, const BoostCell& b) {
        return a.w1 != b.w1 ? a.w1 < b.w1 : a.rho < b.rho;
      });
      const std::string path = (dir / "psi0_grid.csv").string();
      std::ofstream os(path);
      if (!os) throw Error("cannot write '" + path + "'");
      write_grid_csv(os, cells);
      pr.info("written", path);
    }
  }
  return pr.failed() ? 1 : 0;
}

int cmd_example(const std::string& action, const std::string& name, std::ostream& out) {
  if (action == "list") {
    for (const auto& n : example_names()) out << n << '\n';
    return 0;
  }
  if (action == "dump") {
    out << example_text(name);
    return 0;
  }
  throw Error("example: unknown action '" + action + "' (expected list or dump)");
}

}  // namespace regsyn
