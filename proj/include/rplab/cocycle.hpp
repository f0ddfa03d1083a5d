#pragma once

// Time integration of the nonlinear model problems
//
//   delay:      x' = -lambda x + b f(t, v(t)) + g(t),  v(t) = int_{-tau}^0 rho(s) x(t+s) ds
//   parabolic:  u' = A u + B f(t, C u) + g(t)            (mode coordinates)
//
// with sigma-periodic f and g. Trajectories are reported in the coordinates of
// the truncated LinearModel so that quadratic forms apply directly.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rplab/discretization.hpp"

namespace rplab {

/// Scalar sigma-periodic function of time: a constant, a shifted cosine, or a
/// table over one period [0, sigma) with linear interpolation and wrap-around.
class PeriodicFunction {
 public:
  enum class Kind { Constant, Cosine, Table };

  PeriodicFunction() = default;
  static PeriodicFunction constant(double value);
  /// offset + amplitude cos(2 pi t / sigma + phase)
  static PeriodicFunction cosine(double sigma, double amplitude, double phase = 0.0, double offset = 0.0);
  static PeriodicFunction table(double sigma, std::vector<double> samples);

  double operator()(double t) const;
  Kind kind() const { return kind_; }
  /// Period; 0 for constants, which are periodic for every sigma.
  double sigma() const { return sigma_; }
  bool compatible_with(double sigma) const;
  double min_value() const;
  double max_value() const;
  bool is_zero() const;

  double amplitude() const { return amplitude_; }
  double phase() const { return phase_; }
  double offset() const { return offset_; }
  const std::vector<double>& samples() const { return samples_; }

 private:
  Kind kind_ = Kind::Constant;
  double sigma_ = 0.0;
  double amplitude_ = 0.0;
  double phase_ = 0.0;
  double offset_ = 0.0;
  std::vector<double> samples_;
};

enum class NonlinearityKind { Zero, Sigmoid, SaturatingLinear, CustomTable };

/// f(t, v), nondecreasing in v with slope at most mu0.
///   Sigmoid:          b1(t) / (1 + e^{-v}) + b2(t), argument capped at |v| <= 700
///   SaturatingLinear: slope * clamp(v, -v_sat, v_sat) + b2(t)
///   CustomTable:      table(v) + b2(t), table linear between uniform v samples
struct Nonlinearity {
  NonlinearityKind kind = NonlinearityKind::Zero;
  double mu0 = 0.0;
  PeriodicFunction b1;
  PeriodicFunction b2;
  double slope = 0.0;
  double v_sat = 1.0;
  SampledFunction table;

  static Nonlinearity zero();
  /// mu0 defaults to max b1 / 4.
  static Nonlinearity sigmoid(PeriodicFunction b1, PeriodicFunction b2, double mu0 = 0.0);
  static Nonlinearity saturating_linear(double slope, double v_sat, PeriodicFunction b2 = {});
  static Nonlinearity custom_table(SampledFunction table, double mu0, PeriodicFunction b2 = {});

  double operator()(double t, double v) const;

  /// Largest and smallest central-difference slope over t in 64 points of one
  /// period and v in [-60, 60] step 0.01 (plus the table range). Throws
  /// ValidationError when they leave [-1e-9, mu0 + 1e-9].
  void validate(double sigma) const;
};

/// Sum of separable terms time_j(t) * profile_j(x). The delay problem uses
/// only the time factors; the parabolic problem projects each profile onto the
/// cosine modes.
struct ForcingTerm {
  PeriodicFunction time;
  SampledFunction profile = SampledFunction::constant(0.0, 1.0, 1.0);
};

struct Forcing {
  double sigma = 1.0;
  std::vector<ForcingTerm> terms;

  static Forcing none(double sigma) { return {sigma, {}}; }
  static Forcing scalar(double sigma, PeriodicFunction g) { return {sigma, {{std::move(g), {}}}}; }

  double at(double t) const;
  void validate() const;
};

struct TrajectoryGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Vec> states;
  std::shared_ptr<const LinearModel> model;

  std::size_t size() const { return states.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return time(states.size() - 1); }
  const Vec& back() const { return states.back(); }
};

struct StepControl {
  double step_tol = 1e-3;  // embedded estimate bound, relative to 1 + |x|
};

/// Integrator of one model problem for a fixed nonlinearity and forcing.
class Integrator {
 public:
  virtual ~Integrator() = default;

  const LinearModel& model() const { return *model_; }
  std::shared_ptr<const LinearModel> model_ptr() const { return model_; }
  double dt() const { return dt_; }
  double sigma() const { return forcing_.sigma; }
  const Nonlinearity& nonlinearity() const { return f_; }
  const Forcing& forcing() const { return forcing_; }

  /// Steps for `horizon`, which must be a multiple of dt to 1e-9 relative.
  long steps_for(double horizon) const;

  /// States at t0 + k stride dt for k = 0..steps/stride; steps must be a
  /// multiple of stride.
  virtual TrajectoryGrid run(double t0, const Vec& u0, double horizon, int stride = 1) const = 0;
  /// Endpoint only.
  virtual Vec flow(double t0, const Vec& u0, double horizon) const = 0;

 protected:
  Integrator(std::shared_ptr<const LinearModel> model, Nonlinearity f, Forcing g, double dt);

  std::shared_ptr<const LinearModel> model_;
  Nonlinearity f_;
  Forcing forcing_;
  double dt_;
};

/// Method of steps on a fine history grid of spacing dt (tau/dt integer,
/// dt <= tau/8): classical four-stage rule for x with v(t) by the trapezoid
/// rule over the fine history, linear interpolation at half steps, exact
/// buffer shift. Model coordinates are read and written by linear
/// interpolation between the fine grid and the model nodes.
class DelayIntegrator final : public Integrator {
 public:
  DelayIntegrator(const DelayParams& params, Nonlinearity f, Forcing g, double dt, StepControl ctl = {});

  TrajectoryGrid run(double t0, const Vec& u0, double horizon, int stride = 1) const override;
  Vec flow(double t0, const Vec& u0, double horizon) const override;

  /// Fine history (x(t - tau), ..., x(t)) interpolated from model coordinates.
  std::vector<double> fine_history(const Vec& u) const;
  Vec model_coordinates(std::span<const double> fine) const;

 private:
  template <class Sink>
  void integrate(double t0, const Vec& u0, long steps, Sink&& sink) const;

  DelayParams params_;
  StepControl ctl_;
  int fine_n_ = 0;                 // fine intervals over [-tau, 0]
  std::vector<double> weights_;    // trapezoid weight times rho at fine nodes
};

/// Exponential integrator: the diagonal linear part is advanced exactly, the
/// boundary nonlinearity and forcing by a first-order exponential predictor and
/// one trapezoidal corrector. Requires dt <= 0.1 / (mu0 |C| |B|).
class ParabolicIntegrator final : public Integrator {
 public:
  ParabolicIntegrator(const ParabolicParams& params, Nonlinearity f, Forcing g, double dt);

  TrajectoryGrid run(double t0, const Vec& u0, double horizon, int stride = 1) const override;
  Vec flow(double t0, const Vec& u0, double horizon) const override;

  /// Mode coordinates of the forcing at time t.
  Vec forcing_modes(double t) const;
  /// Largest stable step for the explicit boundary term.
  double step_bound() const;

 private:
  template <class Sink>
  void integrate(double t0, const Vec& u0, long steps, Sink&& sink) const;

  Vec decay_;  // e^{lambda_k dt}
  Vec phi1_;   // (e^{lambda_k dt} - 1) / lambda_k
  Vec phi2_;   // (e^{lambda_k dt} - 1 - lambda_k dt) / (lambda_k^2 dt)
  std::vector<Vec> profile_modes_;
};

TrajectoryGrid integrate_delay(const DelayParams& params, const Nonlinearity& f, const Forcing& g, double t0,
                               const Vec& u0, double horizon, double dt);
TrajectoryGrid integrate_parabolic(const ParabolicParams& params, const Nonlinearity& f, const Forcing& g,
                                   double t0, const Vec& u0, double horizon, double dt);

double evaluate_nonlinearity(const Nonlinearity& f, double t, double v);

/// Tabular text export: a '#' header with the model kind and parameters, then
/// one line per state with t and the coordinates.
std::string trajectory_to_text(const TrajectoryGrid& traj);

}  // namespace rplab
