#include <algorithm>
#include <cmath>
#include <numeric>

#include "rplab/error.hpp"
#include "rplab/reduction.hpp"

namespace rplab {

double g_map(double zeta, double t1, double t2, const Vec& v_anchor, const Pipeline& pl) {
  if (!(t2 > t1)) throw Error(ErrorCode::BadParams, "g_map needs t1 < t2");
  const Vec start = v_anchor + zeta * pl.direction();
  return pl.pi(pl.integrator().flow(t1, start, t2 - t1));
}

namespace {

[[noreturn]] void fail_bracket(double target, double lo, double hi, double t1, double t2, const Vec& anchor,
                               const Pipeline& pl) {
  double prev = g_map(lo, t1, t2, anchor, pl);
  for (int i = 1; i <= 8; ++i) {
    const double z = lo + (hi - lo) * i / 8.0;
    const double g = g_map(z, t1, t2, anchor, pl);
    if (!(g > prev))
      throw Error(ErrorCode::MonotonicityBreakdown,
                  "G-map is not increasing on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    prev = g;
  }
  throw Error(ErrorCode::BracketFailure, "target " + std::to_string(target) + " not reached on [" +
                                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

Inversion invert_g_map(double target, double t1, double t2, const Vec& v_anchor, Bracket bracket, const Pipeline& pl,
                       std::optional<double> tol) {
  const double eps = tol.value_or(1e-3 * pl.tolerances().fibre);
  Inversion out;
  auto G = [&](double z) {
    ++out.evaluations;
    return g_map(z, t1, t2, v_anchor, pl) - target;
  };
  double lo = std::min(bracket.lo, bracket.hi);
  double hi = std::max(bracket.lo, bracket.hi);
  if (!(hi > lo)) hi = lo + 1.0;
  double glo = G(lo);
  double ghi = G(hi);
  for (int doublings = 0; !(glo <= 0.0 && ghi >= 0.0); ++doublings) {
    if (glo > 0.0 && ghi < 0.0)
      throw Error(ErrorCode::MonotonicityBreakdown, "G-map decreases between " + std::to_string(lo) + " and " +
                                                        std::to_string(hi));
    if (doublings >= 60) fail_bracket(target, lo, hi, t1, t2, v_anchor, pl);
    const double w = hi - lo;
    if (glo > 0.0) {
      hi = lo;
      ghi = glo;
      lo -= 2.0 * w;
      glo = G(lo);
    } else {
      lo = hi;
      glo = ghi;
      hi += 2.0 * w;
      ghi = G(hi);
    }
  }

  double best = std::abs(glo) < std::abs(ghi) ? lo : hi;
  double gbest = std::min(std::abs(glo), std::abs(ghi));
  int side = 0;
  for (int it = 0; it < 200 && gbest > eps; ++it) {
    if (hi - lo <= 1e-15 * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
    // Illinois-modified false position; plain bisection once it stalls.
    double z = it < 60 && ghi != glo ? (lo * ghi - hi * glo) / (ghi - glo) : 0.5 * (lo + hi);
    if (!(z > lo && z < hi)) z = 0.5 * (lo + hi);
    const double gz = G(z);
    if (std::abs(gz) < gbest) {
      gbest = std::abs(gz);
      best = z;
    }
    if (gz > 0.0) {
      hi = z;
      ghi = gz;
      if (side == 1) glo *= 0.5;
      side = 1;
    } else {
      lo = z;
      glo = gz;
      if (side == -1) ghi *= 0.5;
      side = -1;
    }
  }
  out.zeta = best;
  out.residual = gbest;
  return out;
}

Vec fibre_point(double q, double zeta, double back_horizon, const Pipeline& pl, double* residual) {
  const double t1 = q - back_horizon;
  const Vec anchor = pl.reference_state(t1);
  const double offset = zeta - pl.pi(pl.reference_state(q));
  const double w = std::max(1.0, std::abs(offset));
  const Inversion inv = invert_g_map(zeta, t1, q, anchor, {-w, w}, pl);
  const Vec point = pl.integrator().flow(t1, anchor + inv.zeta * pl.direction(), back_horizon);
  if (residual) *residual = std::abs(pl.pi(point) - zeta);
  return point;
}

FibreReconstruction reconstruct_fibre(double q, const std::vector<double>& zeta_grid, double back_horizon,
                                      const Pipeline& pl) {
  const double m = back_horizon / pl.sigma();
  if (std::abs(m - std::round(m)) > 1e-9 * m || std::lround(m) < 3)
    throw Error(ErrorCode::BadParams, "back horizon must be m sigma with integer m >= 3");

  FibreReconstruction rec;
  rec.q = q;
  rec.back_horizon = back_horizon;
  rec.zeta_grid = zeta_grid;
  const MassMatrix& M = pl.mass();
  for (double z : zeta_grid) {
    double res = 0.0;
    Vec p1 = fibre_point(q, z, back_horizon, pl, &res);
    const Vec p2 = fibre_point(q, z, 2.0 * back_horizon, pl);
    const Vec p4 = fibre_point(q, z, 4.0 * back_horizon, pl);
    rec.change_h = std::max(rec.change_h, M.norm(p2 - p1));
    rec.change_2h = std::max(rec.change_2h, M.norm(p4 - p2));
    rec.residuals.push_back(res);
    rec.points.push_back(std::move(p1));
  }

  // Changes at the level of the inversion tolerance carry no contraction information.
  const double floor = 1e-2 * pl.tolerances().fibre;
  if (rec.change_h <= floor) {
    rec.contraction_factor = 0.0;
  } else {
    rec.contraction_factor = rec.change_2h / rec.change_h;
    rec.not_contracting = rec.contraction_factor >= 1.0;
  }

  std::vector<std::size_t> order(zeta_grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return zeta_grid[a] < zeta_grid[b]; });
  rec.monotone = true;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Vec& a = rec.points[order[i - 1]];
    const Vec& b = rec.points[order[i]];
    if (!(pl.pi(b) > pl.pi(a)) || !(M.norm(b - a) > 0.0)) rec.monotone = false;
  }
  const bool residuals_ok = std::all_of(rec.residuals.begin(), rec.residuals.end(),
                                        [&](double r) { return r <= pl.tolerances().fibre; });
  rec.passed = residuals_ok && rec.monotone && !rec.not_contracting;
  return rec;
}

AttractionReport attraction_check(const TrajectoryGrid& traj, const Pipeline& pl, double back_horizon) {
  const double r = pl.sigma() / traj.dt;
  const long ps = std::lround(r);
  if (std::abs(r - static_cast<double>(ps)) > 1e-9 * r)
    throw Error(ErrorCode::GridMismatch, "trajectory step does not divide sigma");
  const long periods = static_cast<long>(traj.size() - 1) / ps;
  if (periods < 10) throw Error(ErrorCode::BadParams, "attraction check needs at least 10 periods");

  AttractionReport rep;
  rep.tolerance = 10.0 * pl.tolerances().fibre;
  for (long k = 0; k <= periods; ++k) {
    const std::size_t idx = static_cast<std::size_t>(k * ps);
    const Vec& u = traj.states[idx];
    if (!u.allFinite()) throw Error(ErrorCode::NonFiniteState, "trajectory is not bounded");
    const double t = traj.time(idx);
    const Vec p = fibre_point(t, pl.pi(u), back_horizon, pl);
    rep.times.push_back(t);
    rep.distances.push_back(pl.mass().norm(u - p));
  }
  rep.decreasing = eventually_decreasing(rep.distances, 0, pl.tolerances().fibre);
  rep.passed = rep.decreasing && rep.distances.back() <= rep.tolerance;
  return rep;
}

}  // namespace rplab
