#pragma once

#include <string>
#include <vector>

namespace regsyn {

// Built-in systems: example51 (nonlinear exosystem with a Jordan block at
// zero), example52 (harmonic exosystem with a third-order immersion),
// example53 (averaged boost converter).
std::vector<std::string> example_names();
bool is_example(const std::string& name);

// System file text of a built-in example. Throws Error for unknown names.
std::string example_text(const std::string& name);

}  // namespace regsyn
