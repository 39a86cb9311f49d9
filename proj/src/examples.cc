#include "regsyn/examples.h"

#include "regsyn/expr.h"
#include "regsyn/synth.h"
#include "regsyn/system_file.h"

namespace regsyn {

namespace {

constexpr const char* kExample51 = R"(# Plant driven by the exosystem w1' = w2 - w1^4, w2' = -w1^3, whose
# linearization is a 2x2 Jordan block at zero.
[plant]
n = 2
f1 = x2 - w1
f2 = -x1 - x2 - sin(x2) + (1 + x2^2)*u
g = x1

[exosystem]
p = 2
s1 = w2 - w1^4
s2 = -w1^3

[reference]
q = 0

[regulator_solution]
pi1 = 0
pi2 = w1
gamma = (w1 + w2 - w1^4 + sin(w1))/(1 + w1^2)
radius = 0.3

[controller]
nc = 2
phi1 = xi2 - xi1^4
phi2 = -xi1^3
lambda = (xi1 + xi2 - xi1^4 + sin(xi1))/(1 + xi1^2)
Bc = -0.2, -0.02

[simulation]
x0 = 1, -1
xi0 = 0, 0
w0 = 0.5, 0.25
T = 80
dt = 1e-4
)";

constexpr const char* kExample52 = R"(# Harmonic exosystem; the feedforward w1^2 + 2 w1 w2 oscillates at twice
# the exosystem frequency, so the internal model is a third-order immersion.
[plant]
n = 2
f1 = x2 + x1^2 - w1^2
f2 = -x1 - x2 + u
g = x1

[exosystem]
p = 2
s1 = w2
s2 = -w1

[reference]
q = 0

[regulator_solution]
pi1 = 0
pi2 = w1^2
gamma = w1^2 + 2*w1*w2
radius = 0.3

[immersion]
nu = 3
tau1 = w1^2 + w2^2
tau2 = 2*w1*w2
tau3 = w1^2 - w2^2
phi1 = 0
phi2 = -2*xi3
phi3 = 2*xi2
lambda = 0.5*xi1 + xi2 + 0.5*xi3

[simulation]
x0 = 0.1, -0.1
xi0 = 0, 0, 0
w0 = 0.2, 0
T = 60
dt = 1e-4
)";

// The [controller] section is appended at registration: its lambda is the
// linear feedforward Gamma obtained from the linearized regulator equations.
constexpr const char* kExample53 = R"(# Averaged boost converter. x1, x2: capacitor voltage and inductor current
# deviations; u: duty ratio deviation; w1: input voltage deviation;
# w2, w3: sinusoidal load current disturbance at frequency alpha.
[params]
C = 40e-6
L = 4e-3
R = 400
r = 0.25
v0 = 100
z10 = 400
alpha = 200*pi
beta = 0.9
D0 = (v0 + sqrt(v0^2 - 4*z10^2*r/R))/(2*z10)
z20 = z10/(R*D0)

[plant]
n = 2
f1 = -x1/(R*C) + (D0 + u)/C*x2 + z20/C*u - w2/C
f2 = -(D0 + u)/L*x1 - r/L*x2 - z10/L*u + w1/L
g = x1

[exosystem]
p = 3
s1 = 0
s2 = alpha*w3
s3 = -alpha*w2

[reference]
q = 0
)";

constexpr const char* kExample53Simulation = R"(
[simulation]
x0 = 5, 0
xi0 = 0, 0, 0
w0 = 10, 0.8, 0
T = 1
dt = 1e-6
)";

std::string build_example53() {
  const SystemFile base = parse_system(kExample53, "example53");
  const LinearRegulator reg = solve_linear_regulator(linearize(base.plant, base.exo));
  std::string text = kExample53;
  text += "\n[controller]\nnc = 3\nphi1 = 0\nphi2 = alpha*xi3\nphi3 = -alpha*xi2\n";
  text += "lambda = " + to_string(linear_map_exprs(reg.Gamma, "xi").front()) + "\n";
  text += "Bc = 7.5, -0.29, 0.06\n";
  text += kExample53Simulation;
  return text;
}

}  // namespace

std::vector<std::string> example_names() { return {"example51", "example52", "example53"}; }

bool is_example(const std::string& name) {
  for (const auto& n : example_names()) {
    if (n == name) return true;
  }
  return false;
}

std::string example_text(const std::string& name) {
  if (name == "example51") return kExample51;
  if (name == "example52") return kExample52;
  if (name == "example53") {
    static const std::string text = build_example53();
    return text;
  }
  throw Error("unknown example '" + name + "'");
}

}  // namespace regsyn
