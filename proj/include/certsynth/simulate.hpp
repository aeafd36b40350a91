#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "certsynth/certificate.hpp"

namespace certsynth {

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  double dt = 0.0;
  double horizon = 0.0;
  /// Set when the state left the finite range (|x| > 1e6 or NaN); the
  /// trajectory is truncated at the last finite state.
  bool blow_up = false;
};

/// Classical RK4 on a closed-loop field. Throws std::invalid_argument on
/// dt <= 0, T < dt or an open-loop field.
Trajectory integrate(const VectorField& f, const std::vector<double>& x0, double dt, double horizon, double t0 = 0.0);

struct SimulationConfig {
  int n_init = 100;
  double dt = 1e-3;
  double horizon = 50.0;
  /// Arrival at the equilibrium means |x| <= factor * epsilon_origin.
  double arrive_radius_factor = 5.0;
  /// Allowed per-step increase of V along a trajectory.
  double lyapunov_tolerance = 1e-6;
};

struct EmpiricalVerdict {
  int n_trajectories = 0;
  int n_avoid_violations = 0;
  int n_arrive_successes = 0;
  int n_remain_violations = 0;
  int n_blow_up = 0;
  bool checks_avoid = false;
  bool checks_arrive = false;
  bool checks_remain = false;
  std::optional<std::vector<double>> avoid_witness;   // initial state
  std::optional<std::vector<double>> arrive_witness;  // initial state that never arrived
  std::optional<std::vector<double>> remain_witness;
  /// Largest barrier value along trajectories that start in {B <= 0};
  /// -inf when the property has no barrier or no certificate was given.
  double max_barrier = -std::numeric_limits<double>::infinity();
  /// Steps where the Lyapunov function rose by more than the tolerance.
  long lyapunov_increases = 0;

  /// No avoid or remain violation and every trajectory arrived (for the
  /// components the property has).
  bool clean() const;
};

/// Simulates n_init trajectories from X_I (or X for stability) and checks
/// the avoid / arrive / remain components of the property. With a
/// certificate, also tracks barrier invariance and Lyapunov decrease, and
/// RSWA remain uses the verified beta sublevel set as trigger.
EmpiricalVerdict check_property(const PropertyProblem& p, const VectorField& closed_loop, const SimulationConfig& cfg,
                                Rng& rng, const SymbolicCertificate* cert = nullptr);

/// CSV with header t,x0,...,x{n-1}.
void write_trajectory_csv(std::ostream& os, const Trajectory& t, int stride = 1);

/// Grid of `fn` over a 2-D slice (axes i, j; other coordinates fixed at
/// `fixed`) of the box [lo, hi]: CSV with header xi,xj,value.
void write_contour_csv(std::ostream& os, const Expr& fn, int dim, int axis_i, int axis_j, const std::vector<double>& lo,
                       const std::vector<double>& hi, int resolution, const std::vector<double>& fixed = {});

}  // namespace certsynth
