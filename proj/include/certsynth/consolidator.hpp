#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "certsynth/certificate.hpp"

namespace certsynth {

struct ConsolidatorConfig {
  int n_cloud = 100;
  /// Cloud radius as a fraction of the condition region's diameter.
  double r_cloud_fraction = 0.05;
  int n_ascent = 20;
  /// Ascent step as a fraction of the cloud radius.
  double eta_fraction = 0.1;
  /// Tolerance for equality atoms (boundaries, zero level sets) when
  /// filtering points into the domain.
  double eq_tolerance = 0.05;
};

struct CexBundle {
  std::vector<double> origin;
  std::string condition_id;
  Eigen::MatrixXd cloud;                 // dim x count, includes the origin
  std::vector<double> ascent_violation;  // v along accepted ascent steps
};

/// Expands a counterexample into a cloud of domain points: Gaussian
/// perturbations around it plus a normalized gradient ascent on the
/// violation measure p (q(x) - threshold).
CexBundle consolidate(const std::vector<double>& cex, const Condition& cond, const PropertyProblem& p,
                      const SymbolicCertificate& cert, const VectorField& closed_loop, const ConsolidatorConfig& cfg,
                      Rng& rng);

}  // namespace certsynth
