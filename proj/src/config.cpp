#include "certsynth/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace certsynth {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) { throw ConfigError(what, line_of(n)); }

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
  }
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const YAML::Node& map, const std::string& key, T& out) {
  if (map[key]) out = scalar<T>(map[key], key);
}

RegionRole parse_role(const YAML::Node& n) {
  const auto s = n.as<std::string>();
  if (s == "domain") return RegionRole::kDomain;
  if (s == "init") return RegionRole::kInit;
  if (s == "unsafe") return RegionRole::kUnsafe;
  if (s == "safe") return RegionRole::kSafe;
  if (s == "goal") return RegionRole::kGoal;
  if (s == "final") return RegionRole::kFinal;
  fail(n, "unknown region role '" + s + "' (expected domain, init, unsafe, safe, goal or final)");
}

NetShape parse_shape(const YAML::Node& n, const std::string& what) {
  if (!n.IsMap()) fail(n, what + " must be a map with 'neurons' and 'activations'");
  check_keys(n, {"neurons", "activations"}, what);
  if (!n["neurons"] || !n["neurons"].IsSequence()) fail(n, what + ".neurons must be a list");
  if (!n["activations"] || !n["activations"].IsSequence()) fail(n, what + ".activations must be a list");
  NetShape s;
  for (const auto& v : n["neurons"]) {
    const int w = scalar<int>(v, what + ".neurons");
    if (w < 1) fail(v, what + ".neurons entries must be positive");
    s.hidden.push_back(w);
  }
  for (const auto& a : n["activations"]) {
    try {
      s.activations.push_back(Activation::parse(scalar<std::string>(a, what + ".activations")));
    } catch (const std::invalid_argument& e) {
      fail(a, e.what());
    }
  }
  if (s.hidden.size() != s.activations.size()) fail(n, what + ": one activation per hidden layer is required");
  return s;
}

void read_train(const YAML::Node& n, TrainConfig& t) {
  check_keys(n, {"learn_rate", "max_epochs", "loss", "leaky_slope", "band_epsilon", "control_loss_weight",
                 "samples_per_region", "patience"},
             "train");
  read_opt(n, "learn_rate", t.learn_rate);
  read_opt(n, "max_epochs", t.max_epochs);
  read_opt(n, "leaky_slope", t.leaky_slope);
  read_opt(n, "band_epsilon", t.band_epsilon);
  read_opt(n, "control_loss_weight", t.control_loss_weight);
  read_opt(n, "samples_per_region", t.samples_per_region);
  read_opt(n, "patience", t.patience);
  if (n["loss"]) {
    const auto s = scalar<std::string>(n["loss"], "loss");
    if (s == "softplus") {
      t.loss_shape = LossShape::kSoftplus;
    } else if (s == "leaky_relu") {
      t.loss_shape = LossShape::kLeakyRelu;
    } else {
      fail(n["loss"], "train.loss must be softplus or leaky_relu");
    }
  }
  if (!(t.learn_rate >= 0)) fail(n, "train.learn_rate must be non-negative");
  if (t.max_epochs < 1) fail(n, "train.max_epochs must be positive");
  if (!(t.band_epsilon > 0)) fail(n, "train.band_epsilon must be positive");
}

}  // namespace

ProblemConfig config_for(const BenchmarkEntry& e) {
  ProblemConfig c;
  c.name = e.name + "-" + kind_name(e.kind);
  c.benchmark_id = e.id;
  c.problem = e.problem();
  c.shapes = e.shapes();
  return c;
}

ProblemConfig parse_problem_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a map", line_of(root));
  check_keys(root,
             {"name", "property", "dynamics", "regions", "gamma", "epsilon", "delta", "networks", "train", "cegis",
              "verifier", "consolidator"},
             "configuration");

  ProblemConfig c;
  read_opt(root, "name", c.name);
  PropertyProblem& p = c.problem;
  if (!root["property"]) throw ConfigError("missing 'property'", line_of(root));
  try {
    p.kind = parse_kind(scalar<std::string>(root["property"], "property"));
  } catch (const ProblemError& e) {
    fail(root["property"], e.what());
  }

  const YAML::Node dyn = root["dynamics"];
  if (!dyn || !dyn.IsSequence() || dyn.size() == 0) throw ConfigError("'dynamics' must be a non-empty list", line_of(root));
  std::vector<std::string> comps;
  for (const auto& d : dyn) comps.push_back(scalar<std::string>(d, "dynamics"));
  // Inputs are inferred from the highest u index used.
  int n_inputs = 0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    try {
      const Expr e = parse(comps[i], static_cast<int>(comps.size()), 64);
      n_inputs = std::max(n_inputs, e.max_input_index() + 1);
    } catch (const std::exception& e) {
      fail(dyn[i], std::string("dynamics: ") + e.what());
    }
  }
  try {
    p.dynamics = VectorField::parse(comps, n_inputs);
  } catch (const std::exception& e) {
    fail(dyn, std::string("dynamics: ") + e.what());
  }

  const YAML::Node regions = root["regions"];
  if (!regions || !regions.IsMap()) throw ConfigError("'regions' must be a map", line_of(root));
  for (const auto& kv : regions) {
    const RegionRole role = parse_role(kv.first);
    try {
      p.regions[role] = Region::parse(scalar<std::string>(kv.second, "region"));
    } catch (const std::exception& e) {
      fail(kv.second, std::string("region '") + role_name(role) + "': " + e.what());
    }
  }
  read_opt(root, "gamma", p.gamma);
  read_opt(root, "epsilon", p.epsilon_origin);
  read_opt(root, "delta", p.delta);
  if (!(p.gamma > 0)) fail(root["gamma"], "gamma must be positive");
  if (!(p.epsilon_origin > 0)) fail(root["epsilon"], "epsilon must be positive");
  if (!(p.delta > 0)) fail(root["delta"], "delta must be positive");

  const YAML::Node nets = root["networks"];
  if (!nets || !nets.IsMap()) throw ConfigError("'networks' must be a map with at least 'v'", line_of(root));
  check_keys(nets, {"v", "b", "controller"}, "networks");
  if (!nets["v"]) fail(nets, "networks.v is required");
  const NetShape v = parse_shape(nets["v"], "networks.v");
  c.shapes.v = certificate_spec(p.kind, Target::kV, v.hidden, v.activations);
  if (needs_second_function(p.kind)) {
    if (!nets["b"]) fail(nets, std::string("networks.b is required for ") + kind_name(p.kind));
    const NetShape b = parse_shape(nets["b"], "networks.b");
    c.shapes.b = certificate_spec(p.kind, Target::kB, b.hidden, b.activations);
  } else if (nets["b"]) {
    fail(nets["b"], std::string("networks.b is not used by ") + kind_name(p.kind));
  }
  if (n_inputs > 0) {
    NetShape ctrl{{8}, {Activation::parse("linear")}};
    if (nets["controller"]) ctrl = parse_shape(nets["controller"], "networks.controller");
    c.shapes.controller = controller_spec(ctrl.hidden, ctrl.activations, n_inputs);
  } else if (nets["controller"]) {
    fail(nets["controller"], "networks.controller given but the dynamics use no inputs");
  }

  if (root["train"]) read_train(root["train"], c.cegis.train);
  if (const YAML::Node n = root["cegis"]) {
    check_keys(n, {"max_loops", "seed", "rounding", "level_samples"}, "cegis");
    read_opt(n, "max_loops", c.cegis.max_loops);
    read_opt(n, "seed", c.cegis.seed);
    read_opt(n, "rounding", c.cegis.rounding);
    read_opt(n, "level_samples", c.cegis.level_samples);
    if (!(c.cegis.rounding > 0)) fail(n, "cegis.rounding must be positive");
  }
  if (const YAML::Node n = root["verifier"]) {
    check_keys(n, {"max_splits", "timeout_s", "smt_dump_dir"}, "verifier");
    read_opt(n, "max_splits", c.cegis.verifier.max_splits);
    read_opt(n, "timeout_s", c.cegis.verifier.timeout_s);
    read_opt(n, "smt_dump_dir", c.cegis.verifier.smt_dump_dir);
  }
  if (const YAML::Node n = root["consolidator"]) {
    check_keys(n, {"n_cloud", "r_cloud_fraction", "n_ascent", "eta_fraction", "eq_tolerance"}, "consolidator");
    read_opt(n, "n_cloud", c.cegis.consolidator.n_cloud);
    read_opt(n, "r_cloud_fraction", c.cegis.consolidator.r_cloud_fraction);
    read_opt(n, "n_ascent", c.cegis.consolidator.n_ascent);
    read_opt(n, "eta_fraction", c.cegis.consolidator.eta_fraction);
    read_opt(n, "eq_tolerance", c.cegis.consolidator.eq_tolerance);
  }
  c.cegis.verifier.delta = p.delta;

  try {
    p.validate(10000, c.cegis.seed);
  } catch (const ProblemError& e) {
    throw ConfigError(e.what(), line_of(regions));
  }
  return c;
}

ProblemConfig load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_config(ss.str());
}

}  // namespace certsynth
