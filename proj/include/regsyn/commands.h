#pragma once

// Command implementations behind the regsyn executable. Each prints
// machine-readable lines to `out`:
//   CHECK <name> PASS|FAIL <value>
//   INFO <name> <value...>
//   METRIC <name> <value>
// and returns the process exit status (0 iff every CHECK passed).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regsyn/boost.h"
#include "regsyn/synth.h"
#include "regsyn/system_file.h"

namespace regsyn {

// Accepts a path or the name of a built-in example.
SystemFile load_system_or_example(const std::string& path_or_name);

// Internal model used for synthesis: the immersion if present, otherwise a
// copy of the exosystem with lambda = gamma from [regulator_solution], or
// lambda = Gamma xi from the linearized regulator equations.
InternalModel default_internal_model(const SystemFile& sys);

struct VerifyOptions {
  int samples = 100;
  std::uint64_t seed = 20240611;
  double residual_tol = 1e-6;
};

int cmd_verify(const SystemFile& sys, std::ostream& out, const VerifyOptions& options = {});

struct SynthesisOutcome {
  ControllerModel controller;
  SynthesisReport report;
  int reduced_from = 0;  // nonzero when center reduction was applied
};

// Throws SynthesisError on precondition failure or an exhausted scan.
SynthesisOutcome synthesize_controller(const SystemFile& sys, const SynthesisOptions& options);

struct SynthesizeOptions {
  SynthesisOptions scan;
  std::string out_path;
};

int cmd_synthesize(const SystemFile& sys, const SynthesizeOptions& options, std::ostream& out);

struct SimulateOptions {
  std::optional<double> T;
  std::optional<double> dt;
  // "x0;xi0;w0", each a comma-separated list; an empty part keeps the default.
  std::optional<std::string> ic;
  std::string out_path;
  int stride = 1;
  std::optional<double> window;
};

int cmd_simulate(const SystemFile& sys, const SimulateOptions& options, std::ostream& out);

// Reads C, L, R, r, v0, z10, alpha, beta from [params]; D0 and z20 are
// recomputed.
BoostParams boost_params_from(const std::vector<std::pair<std::string, double>>& params);

struct BoostOptions {
  std::optional<std::string> params_source;
  std::optional<int> grid_w1;
  std::optional<int> grid_rho;
  std::vector<std::pair<std::string, std::string>> cells;
  std::string out_dir = ".";
  unsigned threads = 0;
  double residual_tol = 1e-3;
};

int cmd_boost(const BoostOptions& options, std::ostream& out);

int cmd_example(const std::string& action, const std::string& name, std::ostream& out);

}  // namespace regsyn
