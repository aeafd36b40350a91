#include "certsynth/certificate_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace certsynth {

namespace {

std::string exact(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

YAML::Node network_node(const Network& n) {
  YAML::Node node;
  node["input_dim"] = n.input_dim();
  node["output_dim"] = n.output_dim();
  const NetworkSpec& s = n.spec();
  for (int w : s.hidden) node["neurons"].push_back(w);
  for (const auto& a : s.activations) node["activations"].push_back(a.name());
  node["positive_output_weights"] = s.positive_output_weights;
  node["use_bias"] = s.use_bias;
  node["shift_output"] = s.shift_output;
  const auto ws = n.weights();
  const auto bs = n.biases();
  for (std::size_t l = 0; l < ws.size(); ++l) {
    YAML::Node layer;
    for (Eigen::Index i = 0; i < ws[l].rows(); ++i) {
      YAML::Node row;
      row.SetStyle(YAML::EmitterStyle::Flow);
      for (Eigen::Index j = 0; j < ws[l].cols(); ++j) row.push_back(exact(ws[l](i, j)));
      layer["weights"].push_back(row);
    }
    YAML::Node b;
    b.SetStyle(YAML::EmitterStyle::Flow);
    for (Eigen::Index i = 0; i < bs[l].size(); ++i) b.push_back(exact(bs[l](i)));
    layer["bias"] = b;
    node["layers"].push_back(layer);
  }
  return node;
}

Network network_from(const YAML::Node& node) {
  NetworkSpec s;
  for (const auto& w : node["neurons"]) s.hidden.push_back(w.as<int>());
  for (const auto& a : node["activations"]) s.activations.push_back(Activation::parse(a.as<std::string>()));
  s.output_dim = node["output_dim"].as<int>();
  s.positive_output_weights = node["positive_output_weights"].as<bool>();
  s.use_bias = node["use_bias"].as<bool>();
  s.shift_output = node["shift_output"].as<bool>();
  std::vector<Eigen::MatrixXd> ws;
  std::vector<Eigen::VectorXd> bs;
  for (const auto& layer : node["layers"]) {
    const auto& rows = layer["weights"];
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = n_rows ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd w(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      for (Eigen::Index j = 0; j < n_cols; ++j) w(i, j) = rows[i][j].as<double>();
    }
    Eigen::VectorXd b(static_cast<Eigen::Index>(layer["bias"].size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = layer["bias"][i].as<double>();
    ws.push_back(std::move(w));
    bs.push_back(std::move(b));
  }
  return Network::from_weights(node["input_dim"].as<int>(), s, ws, bs);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

std::string certificate_to_yaml(const CertificateRecord& r) {
  const PropertyProblem& p = r.problem;
  YAML::Emitter out;
  out << YAML::BeginMap;
  if (!r.name.empty()) out << YAML::Key << "name" << YAML::Value << r.name;
  if (r.benchmark_id) out << YAML::Key << "benchmark" << YAML::Value << r.benchmark_id;
  out << YAML::Key << "seed" << YAML::Value << r.seed;
  out << YAML::Key << "property" << YAML::Value << kind_name(p.kind);
  out << YAML::Key << "dynamics" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : p.dynamics.components) out << YAML::DoubleQuoted << e.to_string();
  out << YAML::EndSeq;
  out << YAML::Key << "regions" << YAML::Value << YAML::BeginMap;
  for (const auto& [role, region] : p.regions) out << YAML::Key << role_name(role) << YAML::Value << region.to_string();
  out << YAML::EndMap;
  out << YAML::Key << "gamma" << YAML::Value << exact(p.gamma);
  out << YAML::Key << "epsilon" << YAML::Value << exact(p.epsilon_origin);
  out << YAML::Key << "delta" << YAML::Value << exact(p.delta);
  out << YAML::Key << "V" << YAML::Value << YAML::DoubleQuoted << r.certificate.v.to_string();
  if (r.certificate.b) out << YAML::Key << "B" << YAML::Value << YAML::DoubleQuoted << r.certificate.b->to_string();
  if (!r.certificate.controller.empty()) {
    out << YAML::Key << "controller" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : r.certificate.controller) out << YAML::DoubleQuoted << e.to_string();
    out << YAML::EndSeq;
  }
  const Levels& lv = r.certificate.levels;
  if (std::isfinite(lv.beta_hat)) out << YAML::Key << "beta_hat" << YAML::Value << exact(lv.beta_hat);
  if (std::isfinite(lv.beta)) out << YAML::Key << "beta" << YAML::Value << exact(lv.beta);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

CertificateRecord certificate_from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  auto need = [&](const char* key) {
    if (!root[key]) throw ConfigError(std::string("certificate file lacks '") + key + "'");
    return root[key];
  };
  CertificateRecord r;
  try {
    if (root["name"]) r.name = root["name"].as<std::string>();
    if (root["benchmark"]) r.benchmark_id = root["benchmark"].as<int>();
    if (root["seed"]) r.seed = root["seed"].as<std::uint64_t>();
    PropertyProblem& p = r.problem;
    p.kind = parse_kind(need("property").as<std::string>());
    std::vector<std::string> comps;
    for (const auto& d : need("dynamics")) comps.push_back(d.as<std::string>());
    int n_inputs = 0;
    for (const auto& s : comps) {
      n_inputs = std::max(n_inputs, parse(s, static_cast<int>(comps.size()), 64).max_input_index() + 1);
    }
    p.dynamics = VectorField::parse(comps, n_inputs);
    for (const auto& kv : need("regions")) {
      const auto role = kv.first.as<std::string>();
      bool found = false;
      for (RegionRole rr : {RegionRole::kDomain, RegionRole::kInit, RegionRole::kUnsafe, RegionRole::kSafe,
                            RegionRole::kGoal, RegionRole::kFinal}) {
        if (role == role_name(rr)) {
          p.regions[rr] = Region::parse(kv.second.as<std::string>());
          found = true;
        }
      }
      if (!found) throw ConfigError("unknown region role '" + role + "'", kv.first.Mark().line + 1);
    }
    if (root["gamma"]) p.gamma = root["gamma"].as<double>();
    if (root["epsilon"]) p.epsilon_origin = root["epsilon"].as<double>();
    if (root["delta"]) p.delta = root["delta"].as<double>();
    const int n = p.dim();
    r.certificate.v = parse(need("V").as<std::string>(), n);
    if (root["B"]) r.certificate.b = parse(root["B"].as<std::string>(), n);
    if (root["controller"]) {
      for (const auto& e : root["controller"]) r.certificate.controller.push_back(parse(e.as<std::string>(), n));
    }
    if (root["beta_hat"]) r.certificate.levels.beta_hat = root["beta_hat"].as<double>();
    if (root["beta"]) r.certificate.levels.beta = root["beta"].as<double>();
  } catch (const ConfigError&) {
    throw;
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid certificate file: ") + e.what());
  }
  if (static_cast<int>(r.certificate.controller.size()) != r.problem.dynamics.dim_input) {
    throw ConfigError("controller has " + std::to_string(r.certificate.controller.size()) + " outputs, dynamics use " +
                      std::to_string(r.problem.dynamics.dim_input) + " inputs");
  }
  return r;
}

std::string networks_to_yaml(const Candidates& c) {
  YAML::Node root;
  root["v"] = network_node(c.v);
  if (c.b) root["b"] = network_node(*c.b);
  if (c.controller) root["controller"] = network_node(*c.controller);
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

Candidates networks_from_yaml(const std::string& text) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root["v"]) throw ConfigError("network sidecar lacks 'v'");
    Candidates c{network_from(root["v"]), {}, {}};
    if (root["b"]) c.b = network_from(root["b"]);
    if (root["controller"]) c.controller = network_from(root["controller"]);
    return c;
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
}

std::string write_certificate(const std::string& stem, const CertificateRecord& r, const Candidates* networks) {
  const std::string path = stem + ".cert.yaml";
  write_file(path, certificate_to_yaml(r));
  if (networks) write_file(stem + ".net.yaml", networks_to_yaml(*networks));
  return path;
}

CertificateRecord read_certificate(const std::string& path) { return certificate_from_yaml(read_file(path)); }

}  // namespace certsynth
