#include "regsyn/system_file.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "regsyn/synth.h"

namespace regsyn {

namespace {

const std::vector<std::string>& known_sections() {
  static const std::vector<std::string> names{"params",     "plant",    "exosystem",
                                              "reference",  "controller", "immersion",
                                              "regulator_solution", "simulation"};
  return names;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool is_reserved(const std::string& name) {
  static const std::regex indexed("(x|w|xi)[0-9]+");
  static const std::set<std::string> words{"u", "pi", "sin", "cos", "tan", "exp", "sqrt", "abs"};
  return words.count(name) > 0 || std::regex_match(name, indexed);
}

class SectionReader {
 public:
  SectionReader(const RawSection& section, const std::string& source,
                const std::map<std::string, Expr, std::less<>>& params)
      : section_(section), source_(source), params_(params) {}

  [[noreturn]] void fail(const std::string& message, int line) const {
    throw FileError(source_ + ":" + std::to_string(line) + ": [" + section_.name + "] " + message);
  }

  const std::string* find(const std::string& key, int* line = nullptr) const {
    for (std::size_t i = 0; i < section_.entries.size(); ++i) {
      if (section_.entries[i].first == key) {
        used_.insert(key);
        if (line) *line = section_.lines[i];
        return &section_.entries[i].second;
      }
    }
    return nullptr;
  }

  const std::string& require(const std::string& key, int* line) const {
    const std::string* v = find(key, line);
    if (!v) fail("missing key '" + key + "'", section_.line);
    return *v;
  }

  Expr expr(const std::string& key) const {
    int line = 0;
    const std::string& text = require(key, &line);
    return parse_value(text, key, line);
  }

  std::optional<Expr> optional_expr(const std::string& key) const {
    int line = 0;
    const std::string* text = find(key, &line);
    if (!text) return std::nullopt;
    return parse_value(*text, key, line);
  }

  double number(const std::string& key) const {
    int line = 0;
    const std::string& text = require(key, &line);
    return constant(text, key, line);
  }

  std::optional<double> optional_number(const std::string& key) const {
    int line = 0;
    const std::string* text = find(key, &line);
    if (!text) return std::nullopt;
    return constant(*text, key, line);
  }

  int dimension(const std::string& key) const {
    const double v = number(key);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1000.0) {
      int line = 0;
      find(key, &line);
      fail("'" + key + "' must be a positive integer", line);
    }
    return static_cast<int>(v);
  }

  std::vector<Expr> indexed(const std::string& prefix, int count) const {
    std::vector<Expr> out;
    for (int i = 1; i <= count; ++i) out.push_back(expr(prefix + std::to_string(i)));
    return out;
  }

  std::optional<Eigen::VectorXd> optional_list(const std::string& key) const {
    int line = 0;
    const std::string* text = find(key, &line);
    if (!text) return std::nullopt;
    std::vector<double> values;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = text->find(',', start);
      const std::string item =
          trim(std::string_view(*text).substr(start, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - start));
      if (item.empty()) fail("'" + key + "' has an empty list entry", line);
      values.push_back(constant(item, key, line));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
  }

  Eigen::VectorXd list(const std::string& key, Eigen::Index expected) const {
    auto v = optional_list(key);
    int line = section_.line;
    find(key, &line);
    if (!v) fail("missing key '" + key + "'", section_.line);
    if (v->size() != expected) {
      fail("'" + key + "' has " + std::to_string(v->size()) + " entries, expected " +
               std::to_string(expected),
           line);
    }
    return *v;
  }

  void reject_unknown() const {
    for (std::size_t i = 0; i < section_.entries.size(); ++i) {
      if (!used_.count(section_.entries[i].first)) {
        fail("unknown key '" + section_.entries[i].first + "'", section_.lines[i]);
      }
    }
  }

 private:
  Expr parse_value(const std::string& text, const std::string& key, int line) const {
    try {
      return parse(text).substitute(params_);
    } catch (const ParseError& err) {
      fail("'" + key + "': " + err.detail() + " at column " + std::to_string(err.offset() + 1),
           line);
    }
  }

  double constant(const std::string& text, const std::string& key, int line) const {
    const Expr e = parse_value(text, key, line);
    try {
      return eval(e, Env{});
    } catch (const EvalError& err) {
      fail("'" + key + "' must be a constant: " + err.what(), line);
    }
  }

  const RawSection& section_;
  const std::string& source_;
  const std::map<std::string, Expr, std::less<>>& params_;
  mutable std::set<std::string> used_;
};

template <typename F>
auto wrap_model_errors(const std::string& source, const RawSection& section, F&& f) {
  try {
    return f();
  } catch (const ModelError& err) {
    throw FileError(source + ":" + std::to_string(section.line) + ": [" + section.name + "] " +
                    err.what());
  }
}

}  // namespace

const RawSection* SystemFile::section(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::optional<double> SystemFile::param(std::string_view name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::vector<RawSection> parse_sections(std::string_view text, const std::string& source) {
  std::vector<RawSection> sections;
  std::istringstream in{std::string(text)};
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::size_t hash = raw_line.find('#');
    std::string line = trim(hash == std::string::npos ? raw_line : raw_line.substr(0, hash));
    if (line.empty() || line[0] == ';') continue;
    auto fail = [&](const std::string& message) {
      throw FileError(source + ":" + std::to_string(line_no) + ": " + message);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      const auto& known = known_sections();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        fail("unknown section [" + name + "]");
      }
      for (const auto& s : sections) {
        if (s.name == name) fail("duplicate section [" + name + "]");
      }
      sections.push_back(RawSection{name, line_no, {}, {}});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (sections.empty()) fail("entry outside of any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!is_identifier(key)) fail("invalid key '" + key + "'");
    if (value.empty()) fail("empty value for '" + key + "'");
    RawSection& current = sections.back();
    for (const auto& [k, v] : current.entries) {
      if (k == key) fail("duplicate key '" + key + "'");
    }
    current.entries.emplace_back(key, value);
    current.lines.push_back(line_no);
  }
  return sections;
}

std::vector<std::pair<std::string, double>> evaluate_params(const std::vector<RawSection>& sections,
                                                            const std::string& source) {
  std::vector<std::pair<std::string, double>> params;
  Env env;
  for (const auto& s : sections) {
    if (s.name != "params") continue;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      const auto& [key, value] = s.entries[i];
      const std::string where = source + ":" + std::to_string(s.lines[i]) + ": [params] ";
      if (is_reserved(key)) throw FileError(where + "'" + key + "' is a reserved name");
      try {
        const double v = eval(parse(value), env);
        env[key] = v;
        params.emplace_back(key, v);
      } catch (const ParseError& err) {
        throw FileError(where + "'" + key + "': " + err.detail() + " at column " +
                        std::to_string(err.offset() + 1));
      } catch (const EvalError& err) {
        throw FileError(where + "'" + key + "': " + err.what());
      }
    }
  }
  return params;
}

SystemFile parse_system(std::string_view text, const std::string& source) {
  SystemFile sys;
  sys.source = source;
  sys.sections = parse_sections(text, source);
  sys.params = evaluate_params(sys.sections, source);
  std::map<std::string, Expr, std::less<>> param_exprs;
  for (const auto& [k, v] : sys.params) param_exprs[k] = Expr::number(v);

  auto reader_for = [&](std::string_view name) -> std::optional<SectionReader> {
    const RawSection* s = sys.section(name);
    if (!s) return std::nullopt;
    return SectionReader(*s, source, param_exprs);
  };

  auto exo_reader = reader_for("exosystem");
  if (!exo_reader) throw FileError(source + ": missing section [exosystem]");
  const int p = exo_reader->dimension("p");
  std::vector<Expr> s = exo_reader->indexed("s", p);
  exo_reader->reject_unknown();
  sys.exo = wrap_model_errors(source, *sys.section("exosystem"),
                              [&] { return make_exosystem(p, std::move(s)); });

  auto plant_reader = reader_for("plant");
  if (!plant_reader) throw FileError(source + ": missing section [plant]");
  const int n = plant_reader->dimension("n");
  std::vector<Expr> f = plant_reader->indexed("f", n);
  Expr g = plant_reader->expr("g");
  plant_reader->reject_unknown();
  Expr q = Expr::number(0.0);
  if (auto ref = reader_for("reference")) {
    q = ref->expr("q");
    ref->reject_unknown();
  }
  sys.plant = wrap_model_errors(source, *sys.section("plant"), [&] {
    return make_plant(n, p, std::move(f), std::move(g), std::move(q));
  });

  if (auto ctrl = reader_for("controller")) {
    const int nc = ctrl->dimension("nc");
    std::vector<Expr> phi = ctrl->indexed("phi", nc);
    Expr lambda = ctrl->expr("lambda");
    Eigen::VectorXd bc = ctrl->list("Bc", nc);
    ctrl->reject_unknown();
    sys.controller = wrap_model_errors(source, *sys.section("controller"), [&] {
      return make_controller(nc, std::move(phi), std::move(lambda), std::move(bc));
    });
  }

  if (auto imm = reader_for("immersion")) {
    const int nu = imm->dimension("nu");
    std::vector<Expr> tau = imm->indexed("tau", nu);
    std::vector<Expr> phi = imm->indexed("phi", nu);
    Expr lambda = imm->expr("lambda");
    imm->reject_unknown();
    sys.immersion = wrap_model_errors(source, *sys.section("immersion"), [&] {
      return make_immersion(p, std::move(tau), std::move(phi), std::move(lambda));
    });
  }

  if (auto reg = reader_for("regulator_solution")) {
    std::vector<Expr> pi = reg->indexed("pi", n);
    Expr gamma = reg->expr("gamma");
    const double radius = reg->number("radius");
    reg->reject_unknown();
    sys.regulator = wrap_model_errors(source, *sys.section("regulator_solution"), [&] {
      return make_regulator_solution(n, p, std::move(pi), std::move(gamma), radius);
    });
  }

  if (auto sim = reader_for("simulation")) {
    sys.simulation.x0 = sim->optional_list("x0");
    sys.simulation.xi0 = sim->optional_list("xi0");
    sys.simulation.w0 = sim->optional_list("w0");
    sys.simulation.T = sim->optional_number("T");
    sys.simulation.dt = sim->optional_number("dt");
    sim->reject_unknown();
    const RawSection& raw = *sys.section("simulation");
    auto check = [&](const std::optional<Eigen::VectorXd>& v, Eigen::Index size, const char* key) {
      if (v && v->size() != size) {
        throw FileError(source + ":" + std::to_string(raw.line) + ": [simulation] '" + key +
                        "' has " + std::to_string(v->size()) + " entries, expected " +
                        std::to_string(size));
      }
    };
    check(sys.simulation.x0, n, "x0");
    check(sys.simulation.w0, p, "w0");
    if (sys.controller) check(sys.simulation.xi0, sys.controller->nc, "xi0");
  }
  return sys;
}

SystemFile load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str(), path);
}

std::string render_sections(const std::vector<RawSection>& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i) out += '\n';
    out += '[' + sections[i].name + "]\n";
    for (const auto& [k, v] : sections[i].entries) out += k + " = " + v + '\n';
  }
  return out;
}

std::string format_list(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

std::vector<RawSection> with_controller(std::vector<RawSection> sections,
                                        const ControllerModel& controller) {
  RawSection section;
  section.name = "controller";
  section.entries.emplace_back("nc", std::to_string(controller.nc));
  for (int i = 0; i < controller.nc; ++i) {
    section.entries.emplace_back("phi" + std::to_string(i + 1),
                                 to_string(controller.phi[static_cast<std::size_t>(i)]));
  }
  section.entries.emplace_back("lambda", to_string(controller.lambda));
  section.entries.emplace_back("Bc", format_list(controller.bc));
  section.lines.assign(section.entries.size(), 0);

  const auto it = std::find_if(sections.begin(), sections.end(),
                               [](const RawSection& s) { return s.name == "controller"; });
  if (it != sections.end()) {
    section.line = it->line;
    *it = std::move(section);
  } else {
    // Keep [simulation] last: its xi0 length follows the controller.
    const auto sim = std::find_if(sections.begin(), sections.end(),
                                  [](const RawSection& s) { return s.name == "simulation"; });
    sections.insert(sim, std::move(section));
  }
  // A stale xi0 would no longer match the new controller order.
  for (auto& s : sections) {
    if (s.name != "simulation") continue;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      const auto& [key, value] = s.entries[i];
      if (key == "xi0" && std::count(value.begin(), value.end(), ',') + 1 != controller.nc) {
        s.entries.erase(s.entries.begin() + static_cast<std::ptrdiff_t>(i));
        s.lines.erase(s.lines.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      }
    }
  }
  return sections;
}

}  // namespace regsyn
