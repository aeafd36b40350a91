#include "certsynth/network.hpp"

#include <cmath>
#include <stdexcept>

#include "certsynth/interval.hpp"

namespace certsynth {

Activation Activation::poly(int degree) {
  if (degree != 1 && degree != 2 && degree != 4) throw std::invalid_argument("polynomial activation degree must be 1, 2 or 4");
  return {ActivationKind::kPoly, degree};
}

Activation Activation::parse(const std::string& name) {
  if (name == "linear" || name == "poly1") return poly(1);
  if (name == "poly2" || name == "square") return poly(2);
  if (name == "poly4" || name == "quartic") return poly(4);
  if (name == "tanh") return tanh();
  if (name == "tanh2" || name == "tanh_squared") return tanh_squared();
  if (name == "sigmoid") return sigmoid();
  if (name == "softplus") return softplus();
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string Activation::name() const {
  switch (kind) {
    case ActivationKind::kPoly: return degree == 1 ? "linear" : "poly" + std::to_string(degree);
    case ActivationKind::kTanh: return "tanh";
    case ActivationKind::kTanhSquared: return "tanh2";
    case ActivationKind::kSigmoid: return "sigmoid";
    case ActivationKind::kSoftplus: return "softplus";
  }
  return "?";
}

double Activation::apply(double a) const {
  switch (kind) {
    case ActivationKind::kPoly: return pow_int(a, degree);
    case ActivationKind::kTanh: return std::tanh(a);
    case ActivationKind::kTanhSquared: {
      const double t = std::tanh(a);
      return t * t;
    }
    case ActivationKind::kSigmoid: return certsynth::sigmoid(a);
    case ActivationKind::kSoftplus: return certsynth::softplus(a);
  }
  return 0.0;
}

double Activation::derivative(double a) const {
  switch (kind) {
    case ActivationKind::kPoly: return degree * pow_int(a, degree - 1);
    case ActivationKind::kTanh: {
      const double t = std::tanh(a);
      return 1 - t * t;
    }
    case ActivationKind::kTanhSquared: {
      const double t = std::tanh(a);
      return 2 * t * (1 - t * t);
    }
    case ActivationKind::kSigmoid: {
      const double s = certsynth::sigmoid(a);
      return s * (1 - s);
    }
    case ActivationKind::kSoftplus: return certsynth::sigmoid(a);
  }
  return 0.0;
}

bool Activation::vanishes_at_zero() const {
  return kind == ActivationKind::kPoly || kind == ActivationKind::kTanh || kind == ActivationKind::kTanhSquared;
}

Expr Activation::symbolic(const Expr& a) const {
  switch (kind) {
    case ActivationKind::kPoly: return degree == 1 ? a : pow(a, degree);
    case ActivationKind::kTanh: return certsynth::tanh(a);
    case ActivationKind::kTanhSquared: return pow(certsynth::tanh(a), 2);
    case ActivationKind::kSigmoid: return certsynth::sigmoid(a);
    case ActivationKind::kSoftplus: return certsynth::softplus(a);
  }
  return a;
}

ad::Var Activation::on_tape(ad::Tape& tape, ad::Var a) const {
  switch (kind) {
    case ActivationKind::kPoly: return degree == 1 ? a : tape.powi(a, degree);
    case ActivationKind::kTanh: return tape.unary(a, ad::Unary::kTanh);
    case ActivationKind::kTanhSquared: return tape.unary(a, ad::Unary::kTanhSq);
    case ActivationKind::kSigmoid: return tape.unary(a, ad::Unary::kSigmoid);
    case ActivationKind::kSoftplus: return tape.unary(a, ad::Unary::kSoftplus);
  }
  return a;
}

ad::Var Activation::derivative_on_tape(ad::Tape& tape, ad::Var a) const {
  switch (kind) {
    case ActivationKind::kPoly:
      if (degree == 1) {
        const auto& v = tape.value(a);
        return tape.constant(ad::Mat::Ones(v.rows(), v.cols()));
      }
      return tape.scale(tape.powi(a, degree - 1), degree);
    case ActivationKind::kTanh: return tape.unary(a, ad::Unary::kTanhD1);
    case ActivationKind::kTanhSquared: return tape.unary(a, ad::Unary::kTanhSqD1);
    case ActivationKind::kSigmoid: return tape.unary(a, ad::Unary::kSigmoidD1);
    case ActivationKind::kSoftplus: return tape.unary(a, ad::Unary::kSigmoid);
  }
  return a;
}

// ---------------------------------------------------------------------------

namespace {

double inverse_softplus(double w) {
  if (!(w > 0)) throw std::invalid_argument("positive output weights must be > 0");
  return w > 30 ? w : std::log(std::expm1(w));
}

void validate_spec(const NetworkSpec& spec) {
  if (spec.hidden.size() != spec.activations.size()) {
    throw std::invalid_argument("network needs one activation per hidden layer");
  }
  for (int h : spec.hidden) {
    if (h <= 0) throw std::invalid_argument("hidden layer widths must be positive");
  }
  if (spec.output_dim <= 0) throw std::invalid_argument("output dimension must be positive");
}

}  // namespace

Network::Network(int input_dim, NetworkSpec spec, std::mt19937_64& rng) : input_dim_(input_dim), spec_(std::move(spec)) {
  if (input_dim <= 0) throw std::invalid_argument("network input dimension must be positive");
  validate_spec(spec_);
  int prev = input_dim;
  auto uniform = [&](int rows, int cols, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = u(rng);
    }
    return m;
  };
  for (int h : spec_.hidden) {
    params_.push_back(uniform(h, prev, prev));
    if (spec_.use_bias) params_.push_back(Eigen::MatrixXd::Zero(h, 1));
    prev = h;
  }
  params_.push_back(uniform(spec_.output_dim, prev, prev));
  if (spec_.use_bias) params_.push_back(Eigen::MatrixXd::Zero(spec_.output_dim, 1));
}

Network Network::from_weights(int input_dim, NetworkSpec spec, const std::vector<Eigen::MatrixXd>& weights,
                              const std::vector<Eigen::VectorXd>& biases) {
  validate_spec(spec);
  if (weights.size() != spec.hidden.size() + 1) throw std::invalid_argument("wrong number of weight matrices");
  if (spec.use_bias && biases.size() != weights.size()) throw std::invalid_argument("wrong number of bias vectors");
  Network n;
  n.input_dim_ = input_dim;
  n.spec_ = std::move(spec);
  int prev = input_dim;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const int rows = k < n.spec_.hidden.size() ? n.spec_.hidden[k] : n.spec_.output_dim;
    if (weights[k].rows() != rows || weights[k].cols() != prev) throw std::invalid_argument("weight shape mismatch");
    Eigen::MatrixXd w = weights[k];
    if (k + 1 == weights.size() && n.spec_.positive_output_weights) w = w.unaryExpr(&inverse_softplus);
    n.params_.push_back(w);
    if (n.spec_.use_bias) {
      if (biases[k].size() != rows) throw std::invalid_argument("bias shape mismatch");
      n.params_.push_back(biases[k]);
    }
    prev = rows;
  }
  return n;
}

int Network::layer_param_index(int layer) const { return layer * (spec_.use_bias ? 2 : 1); }

std::vector<Eigen::MatrixXd> Network::weights() const {
  std::vector<Eigen::MatrixXd> w;
  const int layers = static_cast<int>(spec_.hidden.size()) + 1;
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd m = params_[layer_param_index(l)];
    if (l + 1 == layers && spec_.positive_output_weights) m = m.unaryExpr([](double t) { return certsynth::softplus(t); });
    w.push_back(std::move(m));
  }
  return w;
}

std::vector<Eigen::VectorXd> Network::biases() const {
  std::vector<Eigen::VectorXd> b;
  const int layers = static_cast<int>(spec_.hidden.size()) + 1;
  for (int l = 0; l < layers; ++l) {
    const int rows = l + 1 == layers ? spec_.output_dim : spec_.hidden[l];
    b.push_back(spec_.use_bias ? Eigen::VectorXd(params_[layer_param_index(l) + 1]) : Eigen::VectorXd::Zero(rows));
  }
  return b;
}

Eigen::MatrixXd Network::raw_forward(const Eigen::MatrixXd& x) const {
  const auto w = weights();
  const auto b = biases();
  Eigen::MatrixXd z = x;
  for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
    Eigen::MatrixXd a = w[l] * z;
    a.colwise() += b[l];
    const Activation act = spec_.activations[l];
    z = a.unaryExpr([act](double v) { return act.apply(v); });
  }
  Eigen::MatrixXd out = w.back() * z;
  out.colwise() += b.back();
  return out;
}

Eigen::MatrixXd Network::forward_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim_) throw std::invalid_argument("network input dimension mismatch");
  Eigen::MatrixXd out = raw_forward(x);
  if (spec_.shift_output) {
    const Eigen::VectorXd zero = raw_forward(Eigen::MatrixXd::Zero(input_dim_, 1)).col(0);
    out.colwise() -= zero;
  }
  return out;
}

Eigen::VectorXd Network::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim_) throw std::invalid_argument("network input dimension mismatch");
  Eigen::MatrixXd m = Eigen::Map<const Eigen::VectorXd>(x.data(), input_dim_);
  return forward_batch(m).col(0);
}

Eigen::MatrixXd Network::grad_input(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim_) throw std::invalid_argument("network input dimension mismatch");
  const auto w = weights();
  const auto b = biases();
  Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(x.data(), input_dim_);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(input_dim_, input_dim_);
  for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
    const Eigen::VectorXd a = w[l] * z + b[l];
    const Activation act = spec_.activations[l];
    const Eigen::VectorXd d = a.unaryExpr([act](double v) { return act.derivative(v); });
    jac = d.asDiagonal() * (w[l] * jac);
    z = a.unaryExpr([act](double v) { return act.apply(v); });
  }
  return w.back() * jac;
}

std::vector<Expr> Network::to_symbolic() const {
  const auto w = weights();
  const auto b = biases();
  std::vector<Expr> z;
  for (int i = 0; i < input_dim_; ++i) z.push_back(Expr::var(i));
  auto affine = [](const Eigen::MatrixXd& wm, const Eigen::VectorXd& bv, const std::vector<Expr>& in) {
    std::vector<Expr> out;
    for (Eigen::Index r = 0; r < wm.rows(); ++r) {
      Expr s;
      for (Eigen::Index c = 0; c < wm.cols(); ++c) s = s + Expr(wm(r, c)) * in[c];
      out.push_back(s + Expr(bv(r)));
    }
    return out;
  };
  for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
    auto a = affine(w[l], b[l], z);
    z.clear();
    for (auto& e : a) z.push_back(spec_.activations[l].symbolic(e));
  }
  auto out = affine(w.back(), b.back(), z);
  if (spec_.shift_output) {
    const Eigen::VectorXd zero = raw_forward(Eigen::MatrixXd::Zero(input_dim_, 1)).col(0);
    for (int k = 0; k < spec_.output_dim; ++k) out[k] = out[k] - Expr(zero(k));
  }
  return out;
}

std::vector<ad::Var> Network::bind(ad::Tape& tape) const {
  std::vector<ad::Var> vars;
  for (const auto& p : params_) vars.push_back(tape.param(p));
  return vars;
}

ad::Var Network::output_weights(ad::Tape& tape, const std::vector<ad::Var>& p) const {
  const ad::Var raw = p[layer_param_index(static_cast<int>(spec_.hidden.size()))];
  return spec_.positive_output_weights ? tape.unary(raw, ad::Unary::kSoftplus) : raw;
}

ad::Var Network::forward_unshifted(ad::Tape& tape, const std::vector<ad::Var>& p, ad::Var x) const {
  ad::Var z = x;
  for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
    const int idx = layer_param_index(static_cast<int>(l));
    ad::Var a = tape.matmul(p[idx], z);
    if (spec_.use_bias) a = tape.add(a, p[idx + 1]);
    z = spec_.activations[l].on_tape(tape, a);
  }
  ad::Var out = tape.matmul(output_weights(tape, p), z);
  if (spec_.use_bias) out = tape.add(out, p[layer_param_index(static_cast<int>(spec_.hidden.size())) + 1]);
  return out;
}

ad::Var Network::forward(ad::Tape& tape, const std::vector<ad::Var>& p, ad::Var x) const {
  ad::Var out = forward_unshifted(tape, p, x);
  if (spec_.shift_output) out = tape.sub(out, forward_unshifted(tape, p, tape.constant(ad::Mat::Zero(input_dim_, 1))));
  return out;
}

std::pair<ad::Var, ad::Var> Network::forward_tangent(ad::Tape& tape, const std::vector<ad::Var>& p, ad::Var x,
                                                     ad::Var tangent) const {
  ad::Var z = x;
  ad::Var t = tangent;
  for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
    const int idx = layer_param_index(static_cast<int>(l));
    ad::Var a = tape.matmul(p[idx], z);
    if (spec_.use_bias) a = tape.add(a, p[idx + 1]);
    const Activation& act = spec_.activations[l];
    t = tape.mul(act.derivative_on_tape(tape, a), tape.matmul(p[idx], t));
    z = act.on_tape(tape, a);
  }
  const ad::Var wo = output_weights(tape, p);
  ad::Var out = tape.matmul(wo, z);
  if (spec_.use_bias) out = tape.add(out, p[layer_param_index(static_cast<int>(spec_.hidden.size())) + 1]);
  if (spec_.shift_output) {
    // N(0) depends on the parameters, so it is recomputed on the tape.
    out = tape.sub(out, forward_unshifted(tape, p, tape.constant(ad::Mat::Zero(input_dim_, 1))));
  }
  return {out, tape.matmul(wo, t)};
}

VectorField close_loop(const VectorField& f, const std::vector<Expr>& controller) {
  if (static_cast<int>(controller.size()) != f.dim_input) {
    throw std::invalid_argument("controller output dimension " + std::to_string(controller.size()) +
                                " does not match the number of inputs " + std::to_string(f.dim_input));
  }
  VectorField closed;
  closed.dim_state = f.dim_state;
  closed.dim_input = 0;
  for (const auto& c : f.components) closed.components.push_back(substitute_inputs(c, controller));
  closed.validate();
  return closed;
}

VectorField close_loop(const VectorField& f, const Network& controller) {
  if (controller.input_dim() != f.dim_state) throw std::invalid_argument("controller input dimension mismatch");
  return close_loop(f, controller.to_symbolic());
}

}  // namespace certsynth
