#pragma once

// Plain-text system definitions:
//
//   # comment
//   [plant]
//   n = 2
//   f1 = x2 - w1
//   ...
//
// Sections: [params], [plant], [exosystem], [reference], [controller],
// [immersion], [regulator_solution], [simulation]. [params] entries are
// expressions evaluated in order; later entries and every other section may
// refer to earlier names.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regsyn/model.h"
#include "regsyn/regeq.h"

namespace regsyn {

class FileError : public Error {
 public:
  using Error::Error;
};

struct RawSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<int> lines;
};

struct SimulationDefaults {
  std::optional<Eigen::VectorXd> x0;
  std::optional<Eigen::VectorXd> xi0;
  std::optional<Eigen::VectorXd> w0;
  std::optional<double> T;
  std::optional<double> dt;
};

struct SystemFile {
  std::string source;
  std::vector<RawSection> sections;
  std::vector<std::pair<std::string, double>> params;
  PlantModel plant;
  ExosystemModel exo;
  std::optional<ControllerModel> controller;
  std::optional<ImmersionMap> immersion;
  std::optional<RegulatorSolution> regulator;
  SimulationDefaults simulation;

  const RawSection* section(std::string_view name) const;
  std::optional<double> param(std::string_view name) const;
};

SystemFile parse_system(std::string_view text, const std::string& source = "<input>");
SystemFile load_system(const std::string& path);

// Sections only; no model validation. Used for files holding [params] alone.
std::vector<RawSection> parse_sections(std::string_view text, const std::string& source);

// Parameters of a file, evaluated in order.
std::vector<std::pair<std::string, double>> evaluate_params(const std::vector<RawSection>& sections,
                                                            const std::string& source);

std::string render_sections(const std::vector<RawSection>& sections);

// Replaces (or appends) the [controller] section.
std::vector<RawSection> with_controller(std::vector<RawSection> sections,
                                        const ControllerModel& controller);

std::string format_list(const Eigen::VectorXd& v);

}  // namespace regsyn
