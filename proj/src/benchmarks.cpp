#include "certsynth/benchmarks.hpp"

#include <algorithm>
#include <sstream>

namespace certsynth {

namespace {

using R = RegionRole;
using K = PropertyKind;

NetShape shape(std::vector<int> hidden, std::vector<std::string> acts) {
  NetShape s;
  s.hidden = std::move(hidden);
  for (const auto& a : acts) s.activations.push_back(Activation::parse(a));
  return s;
}

NetShape linear_ctrl(int width) { return shape({width}, {"linear"}); }

std::vector<BenchmarkEntry> build() {
  std::vector<BenchmarkEntry> r;
  auto add = [&](BenchmarkEntry e) { r.push_back(std::move(e)); };

  const std::vector<std::string> second_order_lqr{"-x0^3 + x1", "-1.0*x0 - 1.73*x1"};
  const std::vector<std::string> second_order{"-x0^3 + x1", "u0"};
  const std::vector<std::string> third_order_lqr{"-33.71*x0 - 8.49*x1", "-x0*x2 + 28*x0 - x1", "x0*x1 - 8/3*x2"};
  const std::vector<std::string> third_order{"u0 - 10*x0 + 10*x1", "-x0*x2 + 28*x0 - x1", "x0*x1 - 8/3*x2"};
  const std::vector<std::string> pendulum{"u0 + x1", "u1 - 8/3*x1 + 19.62*sin(x0)"};

  add({1, "NonPoly0", K::kStability, {"x0*x1 - x0", "-x1"}, 0,
       {{R::kDomain, "Torus([0, 0], 1, 0.01)"}}, shape({6}, {"poly2"}), {}, {}, false, ""});
  add({2, "Poly1", K::kStability, {"-x0^3 - x0*x2^2", "-x0^2*x1 - x1", "3*x0^2*x2 - 4*x2"}, 0,
       {{R::kDomain, "Torus([0, 0, 0], 10, 0.1)"}}, shape({8}, {"poly2"}), {}, {}, false, ""});
  add({3, "Benchmark1", K::kStability, {"u0 + x0 + x1", "u1 - x0 - x1"}, 2,
       {{R::kDomain, "Torus([0, 0], 10, 0.1)"}}, shape({4}, {"poly2"}), {}, linear_ctrl(15), false, ""});
  add({4, "InvertedPendulum", K::kStability, pendulum, 2,
       {{R::kDomain, "Torus([0, 0], 1, 0.1)"}}, shape({5}, {"poly2"}), {}, linear_ctrl(25), false, ""});
  add({5, "NonPoly1", K::kRoa, {"2*x0^2*x1 - x0", "-x1"}, 0,
       {{R::kDomain, "Rectangle([-2, -2], [2, 2])"}, {R::kInit, "Sphere([-1, 1], 0.1) | Sphere([1, -1], 0.2)"}},
       shape({5}, {"tanh2"}), {}, {}, false, "domain chosen (not specified)"});
  add({6, "LorenzSystem", K::kRoa,
       {"u0 - 10.0*x0 + 10.0*x1", "u1 - x0*x2 + 28.0*x0 - x1", "u2 + x0*x1 - 8/3*x2"}, 3,
       {{R::kDomain, "Rectangle([-1, -1, -1], [1, 1, 1])"}, {R::kInit, "Sphere([0, 0, 0], 0.3)"}},
       shape({8}, {"poly2"}), {}, linear_ctrl(8), false, "domain chosen (not specified)"});
  add({7, "Barr2", K::kSafety, {"x1 - 1 + exp(-x0)", "-sin(x0)^2"}, 0,
       {{R::kDomain, "Rectangle([-2, -2], [2, 2])"},
        {R::kInit, "Sphere([-0.5, 0.5], 0.4)"},
        {R::kUnsafe, "Sphere([0.7, -0.7], 0.3)"}},
       shape({15}, {"tanh"}), {}, {}, false, "unbounded domain x0 >= -2, x1 <= 2 truncated to a box"});
  add({8, "ObstacleAvoidance", K::kSafety,
       {"sin(x2)", "cos(x2)", "(3*x0*sin(x2) + 3*x1*cos(x2))/(x0^2 + x1^2 + 0.5) - sin(x2)"}, 0,
       {{R::kDomain, "Rectangle([-2, -2, -1.57], [2, 2, 1.57])"},
        {R::kInit, "Rectangle([-0.1, -2, -0.52], [0.1, -1.8, 0.52])"},
        {R::kUnsafe, "Rectangle([-0.2, -0.2, -1.57], [0.2, 0.2, 1.57])"}},
       shape({25}, {"poly4"}), {}, {}, true, "unsafe cylinder x0^2 + x1^2 <= 0.04 over-approximated by a box"});
  add({9, "HighOrd8", K::kSafety,
       {"x1", "x2", "x3", "x4", "x5", "x6", "x7",
        "-576*x0 - 2400*x1 - 4180*x2 - 3980*x3 - 2273*x4 - 800*x5 - 170*x6 - 20*x7"}, 0,
       {{R::kDomain, "Rectangle([-2.2, -2.2, -2.2, -2.2, -2.2, -2.2, -2.2, -2.2], [2.2, 2.2, 2.2, 2.2, 2.2, 2.2, 2.2, 2.2])"},
        {R::kInit, "Rectangle([0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9], [1.1, 1.1, 1.1, 1.1, 1.1, 1.1, 1.1, 1.1])"},
        {R::kUnsafe, "Rectangle([-2.2, -2.2, -2.2, -2.2, -2.2, -2.2, -2.2, -2.2], [-1.8, -1.8, -1.8, -1.8, -1.8, -1.8, -1.8, -1.8])"}},
       shape({10}, {"linear"}), {}, {}, true, ""});
  add({10, "CtrlObstacleAvoidance", K::kSafety, {"sin(x2)", "cos(x2)", "u0 - sin(x2)"}, 1,
       {{R::kDomain, "Rectangle([-10, -10, -pi], [10, 10, pi])"},
        {R::kInit, "Rectangle([4, 4, -pi/2], [6, 6, pi/2])"},
        {R::kUnsafe, "Rectangle([-9, -9, -pi/2], [-7, -6, pi/2])"}},
       shape({15}, {"tanh"}), {}, shape({5}, {"tanh"}), false, ""});
  add({11, "NonPoly3", K::kSwa, {"-0.1*x0*x1^3 - 3*x0", "-x1 + x2", "-x2"}, 0,
       {{R::kDomain, "Torus([0, 0, 0], 3, 0.01)"},
        {R::kInit, "Sphere([-0.9, -0.9, -0.9], 1.0)"},
        {R::kUnsafe, "Sphere([0.4, 0.4, 0.4], 0.2) | Sphere([-0.4, 0.4, 0.4], 0.2)"}},
       shape({6}, {"poly2"}), shape({5}, {"tanh"}), {}, false, ""});
  add({12, "Barr3", K::kSwa, {"x1", "1/3*x0^3 - x0 - x1"}, 0,
       {{R::kDomain, "Rectangle([-3, -2], [2.5, 1])"},
        {R::kInit, "Rectangle([0.4, 0.1], [0.8, 0.5])"},
        {R::kUnsafe, "Sphere([-1, -1], 0.4)"}},
       shape({5}, {"poly2"}), shape({5, 5}, {"sigmoid", "poly2"}), {}, false, ""});
  add({13, "SecondOrder", K::kSwa, second_order, 1,
       {{R::kDomain, "Rectangle([-1.5, -1.5], [1.5, 1.5])"},
        {R::kInit, "Rectangle([-0.5, -0.5], [0.5, 0.5])"},
        {R::kUnsafe, "Complement(Rectangle([-1, -1], [1, 1]), Rectangle([-1.5, -1.5], [1.5, 1.5]))"}},
       shape({8}, {"poly2"}), shape({5}, {"poly2"}), linear_ctrl(8), false, ""});
  add({14, "ThirdOrder", K::kSwa, third_order, 1,
       {{R::kDomain, "Rectangle([-6, -6, -6], [6, 6, 6])"},
        {R::kInit, "Rectangle([-1.2, -1.2, -1.2], [1.2, 1.2, 1.2])"},
        {R::kUnsafe, "Complement(Rectangle([-5, -5, -5], [5, 5, 5]), Rectangle([-6, -6, -6], [6, 6, 6]))"}},
       shape({10}, {"poly2"}), shape({8}, {"tanh"}), linear_ctrl(8), false, ""});
  add({15, "SecondOrderLQR", K::kRwa, second_order_lqr, 0,
       {{R::kDomain, "Rectangle([-1.5, -1.5], [1.5, 1.5])"},
        {R::kInit, "Rectangle([-0.5, -0.5], [0.5, 0.5])"},
        {R::kSafe, "Rectangle([-1, -1], [1, 1])"},
        {R::kGoal, "Rectangle([-0.05, -0.05], [0.05, 0.05])"}},
       shape({4}, {"poly2"}), {}, {}, false, ""});
  add({16, "ThirdOrderLQR", K::kRwa, third_order_lqr, 0,
       {{R::kDomain, "Rectangle([-6, -6, -6], [6, 6, 6])"},
        {R::kInit, "Rectangle([-1.2, -1.2, -1.2], [1.2, 1.2, 1.2])"},
        {R::kSafe, "Rectangle([-5, -5, -5], [5, 5, 5])"},
        {R::kGoal, "Rectangle([-0.3, -0.3, -0.3], [0.3, 0.3, 0.3])"}},
       shape({16}, {"poly2"}), {}, {}, false, ""});
  add({17, "SecondOrder", K::kRwa, second_order, 1,
       {{R::kDomain, "Rectangle([-1.5, -1.5], [1.5, 1.5])"},
        {R::kInit, "Rectangle([-0.5, -0.5], [-0.1, -0.1])"},
        {R::kSafe, "Rectangle([-1.5, -1.5], [1.5, 1.5]) \\ Sphere([0.5, 0.5], 0.2)"},
        {R::kGoal, "Rectangle([-0.05, -0.05], [0.05, 0.05])"}},
       shape({4, 4}, {"sigmoid", "poly2"}), {}, linear_ctrl(8), false, ""});
  add({18, "ThirdOrder", K::kRwa, third_order, 1,
       {{R::kDomain, "Rectangle([-6, -6, -6], [6, 6, 6])"},
        {R::kInit, "Rectangle([-1.2, -1.2, -1.2], [1.2, 1.2, 1.2])"},
        {R::kSafe, "Rectangle([-5, -5, -5], [5, 5, 5])"},
        {R::kGoal, "Rectangle([-0.3, -0.3, -0.3], [0.3, 0.3, 0.3])"}},
       shape({5}, {"poly2"}), {}, linear_ctrl(8), false, ""});
  add({19, "InvertedPendulum", K::kRwa, pendulum, 2,
       {{R::kDomain, "Rectangle([-3, -3], [3, 3])"},
        {R::kInit, "Rectangle([-0.6, -0.6], [0.6, 0.6])"},
        {R::kSafe, "Rectangle([-2.5, -2.5], [2.5, 2.5])"},
        {R::kGoal, "Rectangle([-0.01, -0.01], [0.01, 0.01])"}},
       shape({5}, {"sigmoid"}), {}, linear_ctrl(8), false, ""});
  add({20, "SecondOrderLQR", K::kRswa, second_order_lqr, 0,
       {{R::kDomain, "Rectangle([-1.5, -1.5], [1.5, 1.5])"},
        {R::kInit, "Rectangle([-0.5, -0.5], [0.5, 0.5])"},
        {R::kSafe, "Rectangle([-1, -1], [1, 1])"},
        {R::kFinal, "Rectangle([-0.05, -0.05], [0.05, 0.05])"}},
       shape({4}, {"poly2"}), {}, {}, false, ""});
  add({21, "ThirdOrderLQR", K::kRswa, third_order_lqr, 0,
       {{R::kDomain, "Rectangle([-6, -6, -6], [6, 6, 6])"},
        {R::kInit, "Rectangle([-1.2, -1.2, -1.2], [1.2, 1.2, 1.2])"},
        {R::kSafe, "Rectangle([-5, -5, -5], [5, 5, 5])"},
        {R::kFinal, "Rectangle([-0.3, -0.3, -0.3], [0.3, 0.3, 0.3])"}},
       shape({16}, {"poly2"}), {}, {}, false, ""});
  add({22, "InvertedPendulumLQR", K::kRswa, {"-7.21*x0 - 0.34*x1", "-1.34*x0 - 2.997*x1 + 19.62*sin(x0)"}, 0,
       {{R::kDomain, "Rectangle([-3, -3], [3, 3])"},
        {R::kInit, "Rectangle([-0.6, -0.6], [0.6, 0.6])"},
        {R::kSafe, "Rectangle([-2.5, -2.5], [2.5, 2.5])"},
        {R::kFinal, "Rectangle([-0.3, -0.3], [0.3, 0.3])"}},
       shape({5, 5}, {"sigmoid", "poly2"}), {}, {}, false, ""});
  add({23, "SecondOrder", K::kRswa, second_order, 1,
       {{R::kDomain, "Rectangle([-1.5, -1.5], [1.5, 1.5])"},
        {R::kInit, "Rectangle([-0.5, -0.5], [0.5, 0.5])"},
        {R::kSafe, "Rectangle([-1, -1], [1, 1])"},
        {R::kFinal, "Rectangle([-0.05, -0.05], [0.05, 0.05])"}},
       shape({8}, {"poly2"}), {}, linear_ctrl(8), false, ""});
  add({24, "InvertedPendulum", K::kRswa, pendulum, 2,
       {{R::kDomain, "Rectangle([-3, -3], [3, 3])"},
        {R::kInit, "Rectangle([-0.6, -0.6], [0.6, 0.6])"},
        {R::kSafe, "Rectangle([-2.5, -2.5], [2.5, 2.5])"},
        {R::kFinal, "Rectangle([-0.3, -0.3], [0.3, 0.3])"}},
       shape({5, 5}, {"sigmoid", "poly2"}), {}, linear_ctrl(8), false, ""});
  add({25, "SecondOrderLQR", K::kRar, second_order_lqr, 0,
       {{R::kDomain, "Rectangle([-3.5, -3.5], [3.5, 3.5])"},
        {R::kInit, "Rectangle([-2, -2], [2, 2])"},
        {R::kSafe, "Rectangle([-3, -3], [3, 3])"},
        {R::kGoal, "Rectangle([-0.1, -0.1], [0.1, 0.1])"},
        {R::kFinal, "Rectangle([-0.15, -0.15], [0.15, 0.15])"}},
       shape({6}, {"softplus"}), shape({6}, {"poly2"}), {}, false, ""});
  add({26, "InvertedPendulum", K::kRar, pendulum, 2,
       {{R::kDomain, "Rectangle([-3.5, -3.5], [3.5, 3.5])"},
        {R::kInit, "Rectangle([-2, -2], [2, 2])"},
        {R::kSafe, "Rectangle([-3, -3], [3, 3])"},
        {R::kGoal, "Rectangle([-0.1, -0.1], [0.1, 0.1])"},
        {R::kFinal, "Rectangle([-0.2, -0.2], [0.2, 0.2])"}},
       shape({6, 6}, {"sigmoid", "poly2"}), shape({6, 6}, {"sigmoid", "poly2"}), linear_ctrl(8), false, ""});
  return r;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string shape_text(const NetShape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.hidden.size(); ++i) os << (i ? ", " : "") << s.hidden[i];
  os << "] [";
  for (std::size_t i = 0; i < s.activations.size(); ++i) os << (i ? ", " : "") << s.activations[i].name();
  os << "]";
  return os.str();
}

}  // namespace

PropertyProblem BenchmarkEntry::problem() const {
  PropertyProblem p;
  p.kind = kind;
  p.dynamics = VectorField::parse(dynamics, n_inputs);
  for (const auto& [role, text] : regions) p.regions[role] = Region::parse(text);
  return p;
}

CandidateShapes BenchmarkEntry::shapes() const {
  CandidateShapes s;
  s.v = certificate_spec(kind, Target::kV, v.hidden, v.activations);
  if (alt) s.b = certificate_spec(kind, Target::kB, alt->hidden, alt->activations);
  if (controller) s.controller = controller_spec(controller->hidden, controller->activations, n_inputs);
  return s;
}

const std::vector<BenchmarkEntry>& registry() {
  static const std::vector<BenchmarkEntry> r = build();
  return r;
}

const BenchmarkEntry& find_benchmark(const std::string& key) {
  const auto& r = registry();
  const bool numeric = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  for (const auto& e : r) {
    if (numeric && std::to_string(e.id) == key) return e;
    if (!numeric && lower(e.name + "-" + kind_name(e.kind)) == lower(key)) return e;
  }
  std::ostringstream os;
  os << "unknown benchmark '" << key << "'; available:";
  for (const auto& e : r) os << "\n  " << e.id << "  " << e.name << "-" << kind_name(e.kind);
  throw ProblemError(os.str());
}

std::string registry_listing() {
  std::ostringstream os;
  for (const auto& e : registry()) {
    os << e.id << " | " << e.name << " | " << kind_name(e.kind) << " | Ns=" << e.dim() << " Nu=" << e.n_inputs << " | f = [";
    for (std::size_t i = 0; i < e.dynamics.size(); ++i) os << (i ? ", " : "") << e.dynamics[i];
    os << "] | V " << shape_text(e.v);
    if (e.alt) os << " | B " << shape_text(*e.alt);
    if (e.controller) os << " | ctrl " << shape_text(*e.controller) << " -> " << e.n_inputs;
    for (const auto& [role, text] : e.regions) os << " | " << role_name(role) << ": " << text;
    if (e.extended) os << " | extended";
    os << "\n";
  }
  return os.str();
}

}  // namespace certsynth
