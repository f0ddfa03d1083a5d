#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rplab/error.hpp"
#include "rplab/reduction.hpp"

namespace rplab {

const Vec& PeriodicOrbit::state_at(double t, double dt) const {
  const long ps = static_cast<long>(states_over_period.size()) - 1;
  long k = std::lround((t - t0) / dt) % ps;
  if (k < 0) k += ps;
  return states_over_period[static_cast<std::size_t>(k)];
}

namespace {

std::string tail(const std::vector<double>& seq, std::size_t count) {
  std::ostringstream os;
  os.precision(3);
  const std::size_t from = seq.size() > count ? seq.size() - count : 0;
  for (std::size_t i = from; i < seq.size(); ++i) os << (i == from ? "" : " ") << seq[i];
  return os.str();
}

PeriodicOrbit orbit_from_anchor(double t, const Vec& anchor, const Pipeline& pl) {
  PeriodicOrbit orbit;
  orbit.t0 = t;
  orbit.period = pl.sigma();
  orbit.states_over_period = pl.integrator().run(t, anchor, pl.sigma()).states;
  orbit.closure = pl.mass().norm(orbit.states_over_period.back() - orbit.states_over_period.front());
  orbit.pi_coordinate = pl.pi(anchor);
  return orbit;
}

}  // namespace

PeriodicDetection detect_periodic(const TrajectoryGrid& traj, const Pipeline& pl, int max_extra_periods) {
  const double sigma = pl.sigma();
  const double r = sigma / traj.dt;
  const long ps = std::lround(r);
  if (std::abs(r - static_cast<double>(ps)) > 1e-9 * r)
    throw Error(ErrorCode::GridMismatch, "trajectory step does not divide sigma");
  const long periods = static_cast<long>(traj.size() - 1) / ps;
  if (periods < 20) throw Error(ErrorCode::BadParams, "periodicity detection needs at least 20 periods");

  const MassMatrix& M = pl.mass();
  std::vector<Vec> samples;
  for (long k = 0; k <= periods; ++k) samples.push_back(traj.states[static_cast<std::size_t>(k * ps)]);

  PeriodicDetection det;
  double scale = 1.0;
  for (const Vec& u : samples) scale = std::max(scale, M.norm(u));
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) det.d_seq.push_back(M.norm(samples[k + 1] - samples[k]));

  int extra = 0;
  double t_last = traj.t0 + static_cast<double>(periods) * sigma;
  while (det.d_seq.back() > pl.tolerances().periodic * scale / 10.0) {
    if (extra >= max_extra_periods || !samples.back().allFinite() || M.norm(samples.back()) > 1e12)
      throw Error(ErrorCode::NotConverged, "Poincare differences did not settle; d tail: " + tail(det.d_seq, 5));
    samples.push_back(pl.integrator().flow(t_last, samples.back(), sigma));
    t_last += sigma;
    ++extra;
    scale = std::max(scale, M.norm(samples.back()));
    det.d_seq.push_back(M.norm(samples.back() - samples[samples.size() - 2]));
  }
  det.tolerance = pl.tolerances().periodic * scale;
  det.periods_used = static_cast<int>(samples.size()) - 1;
  for (const Vec& u : samples) det.pi_seq.push_back(pl.pi(u));

  // A run that passes near an unstable orbit moves away from it first, so d may
  // rise once after the configured window. The window is extended to the peak of
  // d beyond it; from there on d must decrease.
  const std::size_t configured = std::min(static_cast<std::size_t>(std::max(0, pl.tolerances().transient_periods)),
                                          det.d_seq.size() - 1);
  const std::size_t transient = static_cast<std::size_t>(
      std::max_element(det.d_seq.begin() + static_cast<long>(configured), det.d_seq.end()) - det.d_seq.begin());
  det.transient = static_cast<int>(transient);
  const double floor = 1e-3 * det.tolerance;
  if (!eventually_decreasing(det.d_seq, transient, floor)) {
    std::size_t bad = transient + 1;
    while (bad < det.d_seq.size() && !(det.d_seq[bad] > det.d_seq[bad - 1] && det.d_seq[bad] > floor)) ++bad;
    throw Error(ErrorCode::NotConverged, "Poincare differences increase at period " + std::to_string(bad) + " of " +
                                             std::to_string(det.d_seq.size()) + " after the transient; d: " +
                                             tail(std::vector<double>(det.d_seq.begin(), det.d_seq.begin() + static_cast<long>(bad) + 1), 6));
  }
  det.pi_monotone = eventually_monotone(det.pi_seq, transient, floor);
  det.orbit = orbit_from_anchor(t_last, samples.back(), pl);
  return det;
}

Stability classify_stability(const PeriodicOrbit& orbit, int probes, double radius, const Pipeline& pl,
                             std::uint64_t seed) {
  const MassMatrix& M = pl.mass();
  const Eigen::Index n = orbit.anchor().size();
  std::vector<Vec> dirs{pl.direction(), -pl.direction()};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  while (static_cast<int>(dirs.size()) < probes) {
    Vec d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = normal(rng);
    dirs.push_back(d / M.norm(d));
  }
  dirs.resize(static_cast<std::size_t>(std::max(probes, 0)));

  const long ps = static_cast<long>(orbit.states_over_period.size()) - 1;
  const double floor = std::max(1e-3 * radius, 10.0 * orbit.closure);
  bool all_stay = true;
  bool any_escape = false;
  for (const Vec& d : dirs) {
    TrajectoryGrid run;
    try {
      run = pl.integrator().run(orbit.t0, orbit.anchor() + radius * d, 20.0 * orbit.period);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteState && e.code() != ErrorCode::StepTooLarge) throw;
      any_escape = true;
      continue;
    }
    double max_dev = 0.0;
    std::vector<double> per_period;
    for (std::size_t k = 0; k < run.size(); ++k) {
      const double dev = M.norm(run.states[k] - orbit.states_over_period[k % static_cast<std::size_t>(ps)]);
      max_dev = std::max(max_dev, dev);
      if (static_cast<long>(k) % ps == 0) per_period.push_back(dev);
    }
    if (max_dev > 100.0 * radius) any_escape = true;
    const bool decays = per_period.back() < per_period.front() && eventually_decreasing(per_period, 0, floor);
    if (!(max_dev <= 10.0 * radius && decays)) all_stay = false;
  }
  if (any_escape) return Stability::Unstable;
  return all_stay ? Stability::Stable : Stability::Undetermined;
}

std::optional<PeriodicOrbit> find_unstable_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, const Pipeline& pl,
                                                 double back_horizon) {
  const double q = a.t0;
  const double dt = pl.dt();
  const Vec ub = b.state_at(q, dt);
  const MassMatrix& M = pl.mass();
  const double sep = M.norm(a.anchor() - ub);
  if (!(sep > 1e3 * pl.tolerances().periodic)) return std::nullopt;
  const bool a_low = pl.pi(a.anchor()) <= pl.pi(ub);
  const PeriodicOrbit& orb_lo = a_low ? a : b;
  const PeriodicOrbit& orb_hi = a_low ? b : a;
  double lo = std::min(pl.pi(a.anchor()), pl.pi(ub));
  double hi = std::max(pl.pi(a.anchor()), pl.pi(ub));

  // -1: basin of the lower orbit, +1: upper, 0: undecided within the budget.
  auto basin = [&](const Vec& start) {
    Vec w = start;
    double t = q;
    for (int k = 0; k < 150; ++k) {
      w = pl.integrator().flow(t, w, pl.sigma());
      t += pl.sigma();
      if (M.norm(w - orb_lo.state_at(t, dt)) < 0.1 * sep) return -1;
      if (M.norm(w - orb_hi.state_at(t, dt)) < 0.1 * sep) return 1;
    }
    return 0;
  };

  for (int it = 0; it < 100; ++it) {
    if (hi - lo <= 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
    const double mid = 0.5 * (lo + hi);
    const int side = basin(fibre_point(q, mid, back_horizon, pl));
    if (side == 0) break;
    (side < 0 ? lo : hi) = mid;
  }
  // A few periods along the fibre damp the components transverse to it.
  const Vec start = fibre_point(q, 0.5 * (lo + hi), back_horizon, pl);
  const double t_anchor = q + 3.0 * pl.sigma();
  PeriodicOrbit orbit = orbit_from_anchor(t_anchor, pl.integrator().flow(q, start, 3.0 * pl.sigma()), pl);
  const double r = 1e-3 * sep;
  orbit.stability = classify_stability(orbit, 4, r, pl);
  return orbit;
}

}  // namespace rplab
