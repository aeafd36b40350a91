#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "certsynth/autodiff.hpp"
#include "certsynth/expr.hpp"

namespace certsynth {

enum class ActivationKind { kPoly, kTanh, kTanhSquared, kSigmoid, kSoftplus };

struct Activation {
  ActivationKind kind = ActivationKind::kPoly;
  int degree = 1;  // kPoly only: 1, 2 or 4

  static Activation poly(int degree);
  static Activation tanh() { return {ActivationKind::kTanh, 1}; }
  static Activation tanh_squared() { return {ActivationKind::kTanhSquared, 1}; }
  static Activation sigmoid() { return {ActivationKind::kSigmoid, 1}; }
  static Activation softplus() { return {ActivationKind::kSoftplus, 1}; }
  /// Accepts linear, poly1, poly2, poly4 (also square, quartic), tanh,
  /// tanh2, sigmoid, softplus.
  static Activation parse(const std::string& name);

  std::string name() const;
  double apply(double a) const;
  double derivative(double a) const;
  bool vanishes_at_zero() const;
  Expr symbolic(const Expr& a) const;
  ad::Var on_tape(ad::Tape& tape, ad::Var a) const;
  ad::Var derivative_on_tape(ad::Tape& tape, ad::Var a) const;

  bool operator==(const Activation& o) const { return kind == o.kind && degree == o.degree; }
};

struct NetworkSpec {
  std::vector<int> hidden;
  std::vector<Activation> activations;  // one per hidden layer
  int output_dim = 1;
  /// Output weights are softplus(theta) > 0.
  bool positive_output_weights = false;
  bool use_bias = true;
  /// Subtracts N(0) so that the output vanishes at the origin.
  bool shift_output = false;
};

/// Feed-forward network z_i = act_i(W_i z_{i-1} + b_i), output W z_k + b.
///
/// Parameters are stored as a flat list of matrices in layer order:
/// W_1, [b_1], ..., W_k, [b_k], W_out (raw theta when positive), [b_out].
class Network {
 public:
  Network() = default;
  Network(int input_dim, NetworkSpec spec, std::mt19937_64& rng);
  /// Builds a network from explicit (already positive, if flagged) weights.
  static Network from_weights(int input_dim, NetworkSpec spec, const std::vector<Eigen::MatrixXd>& weights,
                              const std::vector<Eigen::VectorXd>& biases);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return spec_.output_dim; }
  const NetworkSpec& spec() const { return spec_; }

  std::vector<Eigen::MatrixXd>& params() { return params_; }
  const std::vector<Eigen::MatrixXd>& params() const { return params_; }

  /// Effective weights and biases per layer (the output layer last).
  std::vector<Eigen::MatrixXd> weights() const;
  std::vector<Eigen::VectorXd> biases() const;

  Eigen::VectorXd forward(std::span<const double> x) const;
  /// X is n x N; returns d x N.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;
  /// d x n Jacobian at x.
  Eigen::MatrixXd grad_input(std::span<const double> x) const;

  std::vector<Expr> to_symbolic() const;

  /// Registers the parameters on a tape (in params() order).
  std::vector<ad::Var> bind(ad::Tape& tape) const;
  /// Output (d x N) on the tape.
  ad::Var forward(ad::Tape& tape, const std::vector<ad::Var>& p, ad::Var x) const;
  /// Output and its directional derivative along `tangent` (n x N).
  std::pair<ad::Var, ad::Var> forward_tangent(ad::Tape& tape, const std::vector<ad::Var>& p, ad::Var x,
                                              ad::Var tangent) const;

 private:
  Eigen::MatrixXd raw_forward(const Eigen::MatrixXd& x) const;
  ad::Var forward_unshifted(ad::Tape& tape, const std::vector<ad::Var>& p, ad::Var x) const;
  ad::Var output_weights(ad::Tape& tape, const std::vector<ad::Var>& p) const;
  int layer_param_index(int layer) const;

  int input_dim_ = 0;
  NetworkSpec spec_;
  std::vector<Eigen::MatrixXd> params_;
};

/// Substitutes the controller outputs for u_0..u_{m-1}.
VectorField close_loop(const VectorField& f, const Network& controller);
VectorField close_loop(const VectorField& f, const std::vector<Expr>& controller);

}  // namespace certsynth
