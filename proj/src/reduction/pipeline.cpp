#include <algorithm>
#include <cmath>

#include "rplab/error.hpp"
#include "rplab/reduction.hpp"

namespace rplab {

Pipeline::Pipeline(std::shared_ptr<const Integrator> integrator, QuadraticCertificate cert, ReductionTolerances tol)
    : integrator_(std::move(integrator)), cert_(std::move(cert)), tol_(tol) {
  if (!integrator_) throw Error(ErrorCode::BadParams, "pipeline needs an integrator");
  if (cert_.dim() != integrator_->model().n())
    throw Error(ErrorCode::DimensionMismatch, "certificate and model dimensions differ");
  if (cert_.inertia.n_neg == 0) throw Error(ErrorCode::NoNegativeSpace, "certificate has no negative space");
  if (cert_.inertia.n_neg > 1)
    throw Error(ErrorCode::BadParams, "fibre and monotonicity checks need a one-dimensional negative space");
  direction_ = cert_.neg_basis.col(0);
}

long Pipeline::steps_per_period() const { return integrator_->steps_for(sigma()); }

double Pipeline::pi(const Vec& u) const { return project_negative(cert_, mass(), u)(0); }

double Pipeline::V(const Vec& u) const { return quadratic_form(cert_, mass(), u); }

Vec Pipeline::reference_state(double t) const {
  const double h = dt();
  const double s = sigma();
  const double slack = 1e-9 * h;
  const bool covered = reference_ && t >= reference_->t0 - slack && t <= reference_->t_end() + slack;
  if (!covered) {
    double lo = t;
    double hi = t;
    if (reference_) {
      lo = std::min(lo, reference_->t0 + tol_.warmup_periods * s);
      hi = std::max(hi, reference_->t_end());
    }
    const double start = std::floor((lo - tol_.warmup_periods * s) / s) * s;
    const double end = std::ceil((hi + 10.0 * s) / s) * s;
    reference_ = integrator_->run(start, Vec::Zero(integrator_->model().n()), end - start);
  }
  const double r = (t - reference_->t0) / h;
  const long k = std::lround(r);
  if (std::abs(r - static_cast<double>(k)) > 1e-6)
    throw Error(ErrorCode::GridMismatch, "time " + std::to_string(t) + " is not on the integrator lattice");
  return reference_->states[static_cast<std::size_t>(k)];
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Unstable:
      return "unstable";
    case Stability::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

bool eventually_decreasing(const std::vector<double>& seq, std::size_t from, double floor) {
  for (std::size_t i = from + 1; i < seq.size(); ++i)
    if (seq[i] > seq[i - 1] && seq[i] > floor) return false;
  return true;
}

bool eventually_monotone(const std::vector<double>& seq, std::size_t from, double floor) {
  int sign = 0;
  for (std::size_t i = from + 1; i < seq.size(); ++i) {
    const double d = seq[i] - seq[i - 1];
    if (std::abs(d) <= floor) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (sign == 0)
      sign = s;
    else if (s != sign)
      return false;
  }
  return true;
}

AmenableReport amenable_v_check(const TrajectoryGrid& u, const TrajectoryGrid& v, const QuadraticCertificate& cert,
                                const MassMatrix& M, double back_horizon, double v_start) {
  if (u.size() != v.size() || u.size() == 0 || std::abs(u.t0 - v.t0) > 1e-12 * std::max(1.0, std::abs(u.t0)) ||
      std::abs(u.dt - v.dt) > 1e-15 * u.dt)
    throw Error(ErrorCode::GridMismatch, "trajectories are not on a common grid");
  AmenableReport rep;
  rep.max_v = -std::numeric_limits<double>::infinity();
  double d2max = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec d = u.states[k] - v.states[k];
    const double val = quadratic_form(cert, M, d);
    d2max = std::max(d2max, M.norm_squared(d));
    if (val > rep.max_v) {
      rep.max_v = val;
      rep.argmax_time = u.time(k);
    }
  }
  const double p_norm = cert.eigenvalues.cwiseAbs().maxCoeff();
  rep.threshold = 1e-6 * p_norm * d2max + std::exp(-2.0 * cert.nu * back_horizon) * std::max(0.0, v_start);
  rep.passed = rep.max_v < rep.threshold;
  return rep;
}

}  // namespace rplab
