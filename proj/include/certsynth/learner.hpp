#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "certsynth/certificate.hpp"
#include "certsynth/compiled_expr.hpp"
#include "certsynth/network.hpp"

namespace certsynth {

/// Networks being trained: V always, B for SWA/RAR, and the controller when
/// the dynamics have inputs.
struct Candidates {
  Network v;
  std::optional<Network> b;
  std::optional<Network> controller;

  const Network& function(Target t) const;
};

/// Applies the structural flags for a certificate network of the given role:
/// Lyapunov-type V (Stability, ROA, SWA) gets positive output weights, no
/// biases and an output shift when an activation does not vanish at 0.
NetworkSpec certificate_spec(PropertyKind kind, Target target, std::vector<int> hidden,
                             std::vector<Activation> activations);
/// Controllers have no biases and are shifted so that k(0) = 0.
NetworkSpec controller_spec(std::vector<int> hidden, std::vector<Activation> activations, int outputs);

struct CandidateShapes {
  NetworkSpec v;
  std::optional<NetworkSpec> b;
  std::optional<NetworkSpec> controller;
};

Candidates init_candidates(const PropertyProblem& p, const CandidateShapes& shapes, Rng& rng);

enum class LossShape { kLeakyRelu, kSoftplus };

struct TrainConfig {
  double learn_rate = 0.01;
  int max_epochs = 1000;
  LossShape loss_shape = LossShape::kSoftplus;
  double leaky_slope = 0.01;
  /// Half-width of the zero-level band |B| <= band_epsilon used in training.
  double band_epsilon = 0.05;
  /// Negative selects the default: 1 with a controller unless the property is Safety.
  double control_loss_weight = -1.0;
  int samples_per_region = 1000;
  /// Band samples at +-fraction * diameter around region boundaries.
  double boundary_band_fraction = 0.05;
  int min_band_points = 50;
  /// Stop after this many consecutive epochs without empirical violations.
  int patience = 10;
};

double effective_control_weight(const PropertyProblem& p, const TrainConfig& cfg);

/// m(z) of the per-condition loss.
double loss_shape(double z, const TrainConfig& cfg);

/// Training points per condition id plus plain domain samples for the
/// control loss. Points are columns; appended points are never removed.
struct Dataset {
  std::map<std::string, Eigen::MatrixXd> batches;
  std::map<std::string, int> base_size;
  Eigen::MatrixXd domain;

  int count(const std::string& id) const;
  void append(const std::string& id, const Eigen::MatrixXd& points);
};

/// Samples every condition's region (boundary band for boundary conditions)
/// and drops points inside excluded sets.
Dataset build_dataset(const PropertyProblem& p, const std::vector<Condition>& conds, const TrainConfig& cfg, Rng& rng);

struct ConditionStat {
  std::string id;
  double loss = 0.0;
  int violations = 0;
  int points = 0;
};

struct TrainReport {
  int epochs = 0;
  double loss = 0.0;
  double control_loss = 0.0;
  bool converged = false;  // stopped early on zero empirical violations
  std::vector<ConditionStat> stats;
  std::vector<std::string> degenerate;  // conditions with an empty filtered batch
  std::vector<double> trace;            // total loss per epoch
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean cosine similarity between the rows of x and f (n x N each); points
/// with |x| < 1e-6 must be removed by the caller.
ad::Var cosine_loss(ad::Tape& tape, ad::Var x, ad::Var f);

/// Adam with (0.9, 0.999) decay rates.
class Adam {
 public:
  explicit Adam(double lr) : lr_(lr) {}
  void step(std::vector<Eigen::MatrixXd*>& params, const std::vector<Eigen::MatrixXd>& grads);

 private:
  double lr_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

class Learner {
 public:
  Learner(const PropertyProblem& p, std::vector<Condition> conds, TrainConfig cfg);

  /// Runs up to max_epochs full-batch steps. Throws TrainingError on a
  /// non-finite loss.
  TrainReport train(Candidates& c, Dataset& d, Rng& rng);
  /// Loss and violation counts without updating parameters.
  TrainReport evaluate(const Candidates& c, const Dataset& d) const;

  /// Level values implied by the current candidates on the dataset (beta_hat
  /// for ROA-type, the top of the beta grid for RSWA).
  Levels training_levels(const Candidates& c, const Dataset& d) const;

  const std::vector<Condition>& conditions() const { return conds_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  struct Epoch;
  Epoch run_epoch(const Candidates& c, const Dataset& d, bool with_grad) const;
  void ensure_band_points(const Candidates& c, Dataset& d, Rng& rng) const;

  PropertyProblem p_;
  std::vector<Condition> conds_;
  TrainConfig cfg_;
  CompiledExpr dynamics_;
  double control_weight_;
};

}  // namespace certsynth
