#pragma once

// Numerical checks of the reduction principle for a cocycle with a quadratic
// certificate V(u) = (Pu, u) whose negative space is one-dimensional (j = 1).
//
// Tolerances (all documented in the README):
//   tol_squeeze  = 1e-6 + (2 nu dt)^2 / 12, on the violation relative to the
//                  magnitudes of the three terms of the inequality
//   tol_periodic = 1e-7 * max(1, largest |u|_M on the Poincare samples)
//   tol_fibre    = 1e-6 on |Pi point - zeta|; the inversion itself runs at 1e-3 tol_fibre

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "rplab/cocycle.hpp"
#include "rplab/operator_core.hpp"

namespace rplab {

struct ReductionTolerances {
  double squeeze = 1e-6;
  double periodic = 1e-7;
  double fibre = 1e-6;
  int transient_periods = 5;  // window excluded from monotonicity assertions
  double warmup_periods = 20.0;
};

/// Integrator plus certificate, and a lazily extended bounded reference
/// trajectory u* started from the zero state. Not safe for concurrent use
/// because of the reference cache.
class Pipeline {
 public:
  Pipeline(std::shared_ptr<const Integrator> integrator, QuadraticCertificate cert, ReductionTolerances tol = {});

  const Integrator& integrator() const { return *integrator_; }
  const QuadraticCertificate& cert() const { return cert_; }
  const MassMatrix& mass() const { return integrator_->model().M; }
  const ReductionTolerances& tolerances() const { return tol_; }
  double sigma() const { return integrator_->sigma(); }
  double dt() const { return integrator_->dt(); }
  long steps_per_period() const;

  /// Oriented negative eigenvector e (first column of neg_basis).
  const Vec& direction() const { return direction_; }
  double pi(const Vec& u) const;
  double V(const Vec& u) const;

  /// u*(t) for t on the dt-lattice through 0.
  Vec reference_state(double t) const;

 private:
  std::shared_ptr<const Integrator> integrator_;
  QuadraticCertificate cert_;
  ReductionTolerances tol_;
  Vec direction_;
  mutable std::optional<TrajectoryGrid> reference_;
};

// ---------------------------------------------------------------- squeezing

struct SqueezingReport {
  int pairs_checked = 0;
  double worst_violation = 0.0;  // relative, see tol_squeeze
  double worst_l = 0.0;
  double worst_r = 0.0;
  double tolerance = 0.0;
  double nu = 0.0;
  double delta = 0.0;
  bool passed = false;
};

double squeeze_tolerance(double dt, double nu, double base = 1e-6);

/// For `samples` random grid pairs l < r checks
///   e^{2 nu r} V(d(r)) - e^{2 nu l} V(d(l)) <= -delta int_l^r e^{2 nu s} |d(s)|_M^2 ds,
/// d = u - v, with the integral by the trapezoid rule on the grid. The
/// violation is lhs - rhs divided by the sum of the three magnitudes.
SqueezingReport verify_squeezing(const TrajectoryGrid& u, const TrajectoryGrid& v, const QuadraticCertificate& cert,
                                 const MassMatrix& M, int samples, std::uint64_t seed, double tol_base = 1e-6);

// ---------------------------------------------------------------- G-map and fibres

/// Pi of the state reached at t2 from v_anchor + zeta e at t1.
double g_map(double zeta, double t1, double t2, const Vec& v_anchor, const Pipeline& pl);

struct Bracket {
  double lo = -1.0;
  double hi = 1.0;
};

struct Inversion {
  double zeta = 0.0;
  double residual = 0.0;  // |g_map(zeta) - target|
  int evaluations = 0;
};

/// Safeguarded secant/bisection for g_map(zeta) = target. The bracket is
/// expanded geometrically up to 60 doublings. Throws BracketFailure when no
/// straddle is found and MonotonicityBreakdown when a probe shows g_map is
/// not increasing on the final bracket.
Inversion invert_g_map(double target, double t1, double t2, const Vec& v_anchor, Bracket bracket,
                       const Pipeline& pl, std::optional<double> tol = std::nullopt);

/// Approximation of Phi(q, zeta): the point at q reached from u*(q - H) + z e
/// with z solving the G-map equation.
Vec fibre_point(double q, double zeta, double back_horizon, const Pipeline& pl, double* residual = nullptr);

struct FibreReconstruction {
  double q = 0.0;
  double back_horizon = 0.0;
  std::vector<double> zeta_grid;
  std::vector<Vec> points;
  std::vector<double> residuals;
  double change_h = 0.0;   // max_i |p_i(2H) - p_i(H)|_M
  double change_2h = 0.0;  // max_i |p_i(4H) - p_i(2H)|_M
  double contraction_factor = 0.0;  // change_2h / change_h, 0 when change_h is at the inversion floor
  bool not_contracting = false;
  bool monotone = false;  // Pi strictly increasing along the sorted zeta grid
  bool passed = false;
};

/// back_horizon must be an integer multiple m >= 3 of sigma.
FibreReconstruction reconstruct_fibre(double q, const std::vector<double>& zeta_grid, double back_horizon,
                                      const Pipeline& pl);

// ---------------------------------------------------------------- periodic orbits

enum class Stability { Stable, Unstable, Undetermined };
std::string_view to_string(Stability s);

struct PeriodicOrbit {
  double t0 = 0.0;
  double period = 0.0;
  std::vector<Vec> states_over_period;  // t0, t0 + dt, ..., t0 + period
  Stability stability = Stability::Undetermined;
  double pi_coordinate = 0.0;
  double closure = 0.0;  // |u(t0 + period) - u(t0)|_M

  const Vec& anchor() const { return states_over_period.front(); }
  /// Orbit state at an arbitrary lattice time.
  const Vec& state_at(double t, double dt) const;
};

struct PeriodicDetection {
  PeriodicOrbit orbit;
  std::vector<double> d_seq;   // |u(t0 + (k+1) sigma) - u(t0 + k sigma)|_M
  std::vector<double> pi_seq;  // Pi u(t0 + k sigma)
  bool pi_monotone = false;    // after the transient window
  int periods_used = 0;
  int transient = 0;  // periods excluded from the monotonicity checks
  double tolerance = 0.0;
};

/// Needs >= 20 periods in traj; continues integration for up to
/// max_extra_periods when the tail has not yet reached tol_periodic / 10.
/// Throws NotConverged when the Poincare differences do not settle.
PeriodicDetection detect_periodic(const TrajectoryGrid& traj, const Pipeline& pl, int max_extra_periods = 200);

/// Probes +-e and random directions at distance `radius`, 20 periods each.
Stability classify_stability(const PeriodicOrbit& orbit, int probes, double radius, const Pipeline& pl,
                             std::uint64_t seed = 1);

/// Bisects along the fibre at the phase of `a` between two stable orbits for
/// the boundary of their basins, and returns the orbit found there.
std::optional<PeriodicOrbit> find_unstable_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, const Pipeline& pl,
                                                 double back_horizon);

// ---------------------------------------------------------------- amenable sets, attraction

struct AmenableReport {
  double max_v = 0.0;
  double argmax_time = 0.0;
  double threshold = 0.0;  // 1e-6 scale + e^{-2 nu H} max(0, v_start)
  bool passed = false;
};

/// max over the common grid of V(u - v). v_start is V of the difference at the
/// start of the backward horizon H; scale is max |eig P| * max |u - v|_M^2.
AmenableReport amenable_v_check(const TrajectoryGrid& u, const TrajectoryGrid& v, const QuadraticCertificate& cert,
                                const MassMatrix& M, double back_horizon, double v_start);

struct AttractionReport {
  std::vector<double> times;
  std::vector<double> distances;  // |u(t_k) - Phi(t_k, Pi u(t_k))|_M
  bool decreasing = false;
  double tolerance = 0.0;  // 10 tol_fibre
  bool passed = false;
};

/// Samples every period of traj (>= 10 periods, bounded).
AttractionReport attraction_check(const TrajectoryGrid& traj, const Pipeline& pl, double back_horizon);

/// True when seq is nonincreasing from index `from`, ignoring increases of
/// entries that stay below `floor`.
bool eventually_decreasing(const std::vector<double>& seq, std::size_t from, double floor);

/// True when the successive differences from index `from` never change sign,
/// ignoring differences smaller than `floor`.
bool eventually_monotone(const std::vector<double>& seq, std::size_t from, double floor);

}  // namespace rplab
