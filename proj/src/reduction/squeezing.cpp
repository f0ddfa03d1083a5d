#include <algorithm>
#include <cmath>
#include <random>

#include "rplab/error.hpp"
#include "rplab/reduction.hpp"

namespace rplab {

double squeeze_tolerance(double dt, double nu, double base) {
  const double w = 2.0 * nu * dt;
  return base + w * w / 12.0;
}

SqueezingReport verify_squeezing(const TrajectoryGrid& u, const TrajectoryGrid& v, const QuadraticCertificate& cert,
                                 const MassMatrix& M, int samples, std::uint64_t seed, double tol_base) {
  if (u.size() != v.size() || u.size() < 2 || std::abs(u.t0 - v.t0) > 1e-12 * std::max(1.0, std::abs(u.t0)) ||
      std::abs(u.dt - v.dt) > 1e-15 * u.dt)
    throw Error(ErrorCode::GridMismatch, "trajectories are not on a common grid");
  if (u.states.front().size() != cert.dim() || M.size() != cert.dim())
    throw Error(ErrorCode::DimensionMismatch, "trajectory, certificate and mass matrix dimensions differ");

  const std::size_t n = u.size();
  std::vector<double> vd(n);
  std::vector<double> nd(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec d = u.states[k] - v.states[k];
    vd[k] = quadratic_form(cert, M, d);
    nd[k] = M.norm_squared(d);
  }

  SqueezingReport rep;
  rep.nu = cert.nu;
  rep.delta = cert.delta;
  rep.tolerance = squeeze_tolerance(u.dt, cert.nu, tol_base);
  rep.worst_violation = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const double two_nu = 2.0 * cert.nu;
  for (int s = 0; s < samples; ++s) {
    std::size_t l = pick(rng);
    std::size_t r = pick(rng);
    while (r == l) r = pick(rng);
    if (l > r) std::swap(l, r);
    const double span = u.dt * static_cast<double>(r - l);
    if (two_nu * span > 700.0) throw Error(ErrorCode::BadParams, "sample window too long for the exponential weight");

    double integral = 0.0;
    double prev = nd[l];
    for (std::size_t k = l + 1; k <= r; ++k) {
      const double cur = std::exp(two_nu * u.dt * static_cast<double>(k - l)) * nd[k];
      integral += 0.5 * u.dt * (prev + cur);
      prev = cur;
    }
    const double er = std::exp(two_nu * span) * vd[r];
    const double lhs = er - vd[l];
    const double rhs = -cert.delta * integral;
    const double scale = std::abs(er) + std::abs(vd[l]) + std::abs(rhs);
    const double viol = scale > 0.0 ? (lhs - rhs) / scale : 0.0;
    if (viol > rep.worst_violation) {
      rep.worst_violation = viol;
      rep.worst_l = u.time(l);
      rep.worst_r = u.time(r);
    }
    ++rep.pairs_checked;
  }
  if (rep.pairs_checked == 0) rep.worst_violation = 0.0;
  rep.passed = rep.worst_violation <= rep.tolerance;
  return rep;
}

}  // namespace rplab
