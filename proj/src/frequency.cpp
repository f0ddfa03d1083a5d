#include "rplab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>

#include "rplab/error.hpp"
#include "rplab/kernels/kernels.hpp"

namespace rplab {

namespace {

std::string fmt_complex(Complex p) {
  return "(" + std::to_string(p.real()) + ", " + std::to_string(p.imag()) + ")";
}

// int_0^1 e^{zt} dt and int_0^1 t e^{zt} dt
std::pair<Complex, Complex> exp_moments(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex m0{0.0, 0.0}, m1{0.0, 0.0}, term{1.0, 0.0};  // term = z^k / k!
    for (int k = 0; k < 30; ++k) {
      m0 += term / static_cast<double>(k + 1);
      m1 += term / static_cast<double>(k + 2);
      term *= z / static_cast<double>(k + 1);
    }
    return {m0, m1};
  }
  const Complex ez = std::exp(z);
  return {(ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z)};
}

// int_a^b rho(s) e^{p s} ds with rho linear on [a, b], in closed form
Complex segment_integral(const SampledFunction& rho, double a, double b, Complex p) {
  const double ra = rho(a);
  const double rb = rho(b);
  const double span = b - a;
  const auto [m0, m1] = exp_moments(p * span);
  return std::exp(p * a) * span * (ra * m0 + (rb - ra) * m1);
}

void check_parabolic_pole(Complex p, const ParabolicParams& params) {
  const double x = -(p.real() + params.beta) / params.alpha;
  const double kf = x > 0.0 ? std::sqrt(x) / std::numbers::pi : 0.0;
  for (int k : {static_cast<int>(std::floor(kf)), static_cast<int>(std::ceil(kf))}) {
    const double lk = params.mode_eigenvalue(k);
    if (std::abs(p - Complex(lk, 0.0)) < 1e-10 * std::max(1.0, std::abs(lk)))
      throw Error(ErrorCode::PoleAt, "p = " + fmt_complex(p) + " is the eigenvalue of mode " + std::to_string(k));
  }
}

}  // namespace

Complex delay_transfer(Complex p, const DelayParams& params) {
  if (std::abs(p + params.lambda) < 1e-12)
    throw Error(ErrorCode::PoleAt, "p = " + fmt_complex(p) + " coincides with -lambda");
  if (params.rho.is_zero()) return {0.0, 0.0};
  const std::vector<double> bp = params.rho.breakpoints();
  Complex integral{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) integral += segment_integral(params.rho, bp[i], bp[i + 1], p);
  return -params.b / (params.lambda + p) * integral;
}

Complex parabolic_transfer(Complex p, const ParabolicParams& params) {
  check_parabolic_pole(p, params);
  if (params.rho.is_zero()) return {0.0, 0.0};
  Complex z = std::sqrt((p + params.beta) / params.alpha);
  if (z.real() < 0.0) z = -z;
  const int nq = params.quadrature_intervals();
  const std::vector<double> w = simpson_weights(nq, 0.0, 1.0);
  // cosh(z x)/sinh(z) = (e^{z(x-1)} + e^{-z(x+1)}) / (1 - e^{-2z}) for Re z >= 0
  const Complex denom = z * (1.0 - std::exp(-2.0 * z));
  Complex acc{0.0, 0.0};
  for (int i = 0; i <= nq; ++i) {
    const double x = static_cast<double>(i) / nq;
    const double wr = w[static_cast<std::size_t>(i)] * params.rho(x);
    if (wr == 0.0) continue;
    acc += wr * (std::exp(z * (x - 1.0)) + std::exp(-z * (x + 1.0)));
  }
  return -acc / denom;
}

Complex parabolic_transfer_negated_root(Complex p, const ParabolicParams& params) {
  check_parabolic_pole(p, params);
  if (params.rho.is_zero()) return {0.0, 0.0};
  Complex z = std::sqrt((p + params.beta) / params.alpha);
  if (z.real() < 0.0) z = -z;
  z = -z;
  const int nq = params.quadrature_intervals();
  const std::vector<double> w = simpson_weights(nq, 0.0, 1.0);
  const Complex denom = z * std::sinh(z);
  Complex acc{0.0, 0.0};
  for (int i = 0; i <= nq; ++i) {
    const double x = static_cast<double>(i) / nq;
    const double wr = w[static_cast<std::size_t>(i)] * params.rho(x);
    if (wr != 0.0) acc += wr * std::cosh(z * x);
  }
  return -acc / denom;
}

double parabolic_branch_discrepancy(const ParabolicParams& params, int points, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(-params.beta + 0.5, 10.0);
  std::uniform_real_distribution<double> im(-20.0, 20.0);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const Complex p(re(rng), im(rng));
    const Complex a = parabolic_transfer(p, params);
    const Complex b = parabolic_transfer_negated_root(p, params);
    worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
  }
  return worst;
}

Complex generic_transfer(const LinearModel& model, Complex p) {
  const Eigen::Index n = model.n();
  if (model.a_is_diagonal()) {
    const Vec diag = model.A.diagonal();
    const double gap = ((diag.array() - p.real()).square() + p.imag() * p.imag()).sqrt().minCoeff();
    if (gap < 1e-12 * std::max(1.0, diag.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::NearSingular, "p = " + fmt_complex(p) + " is an eigenvalue of A");
    const Vec cb = model.C.cwiseProduct(model.B);
    return kernels::diag_resolvent_sum({cb.data(), static_cast<std::size_t>(n)},
                                       {diag.data(), static_cast<std::size_t>(n)}, p);
  }
  const Eigen::MatrixXcd shifted = model.A.cast<Complex>() - p * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::VectorXcd rhs = model.B.cast<Complex>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  const Eigen::VectorXcd y = lu.solve(rhs);
  const double residual = (shifted * y - rhs).norm();
  if (!y.allFinite() || residual > 1e-9 * rhs.norm())
    throw Error(ErrorCode::NearSingular,
                "resolvent solve at p = " + fmt_complex(p) + " has residual " + std::to_string(residual));
  return model.C.cast<Complex>().dot(y);  // dot conjugates the left operand; C is real
}

Transfer delay_evaluator(const DelayParams& params) {
  return [params](Complex p) { return delay_transfer(p, params); };
}

Transfer parabolic_evaluator(const ParabolicParams& params) {
  return [params](Complex p) { return parabolic_transfer(p, params); };
}

Transfer generic_evaluator(const LinearModel& model) {
  return [model](Complex p) { return generic_transfer(model, p); };
}

FrequencyReport certify_condition(const Transfer& transfer, double nu, double mu0, const SweepOptions& opts) {
  if (!(mu0 > 0.0)) throw Error(ErrorCode::BadRange, "mu0 must be > 0");
  if (!std::isfinite(nu)) throw Error(ErrorCode::BadRange, "nu must be finite");
  if (opts.n_omega < 2 || !(opts.omega_min > 0.0) || !(opts.omega_max > opts.omega_min) ||
      !std::isfinite(opts.omega_max))
    throw Error(ErrorCode::BadRange, "frequency grid needs n_omega >= 2 and 0 < omega_min < omega_max");

  FrequencyReport rep;
  rep.nu = nu;
  rep.mu0 = mu0;
  const double inv_mu0 = std::isinf(mu0) ? 0.0 : 1.0 / mu0;

  const int n = opts.n_omega;
  rep.omega_grid.resize(static_cast<std::size_t>(n));
  rep.omega_grid[0] = 0.0;
  const double llo = std::log10(opts.omega_min);
  const double lhi = std::log10(opts.omega_max);
  for (int i = 1; i < n; ++i)
    rep.omega_grid[static_cast<std::size_t>(i)] = n == 2 ? opts.omega_max : std::pow(10.0, llo + (lhi - llo) * (i - 1) / (n - 2));

  rep.margins.resize(rep.omega_grid.size());
  double k_sup = 0.0;
  const double outer = opts.omega_max / 10.0;
  for (std::size_t i = 0; i < rep.omega_grid.size(); ++i) {
    const double w = rep.omega_grid[i];
    Complex value;
    try {
      value = transfer(Complex(-nu, w));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PoleAt || e.code() == ErrorCode::NearSingular)
        throw Error(ErrorCode::BadRange, "nu = " + std::to_string(nu) + " puts a pole on the sweep line (" +
                                             e.what() + ")");
      throw;
    }
    if (i % 64 == 1 && w > 0.0) {
      const Complex mirrored = transfer(Complex(-nu, -w));
      if (std::abs(mirrored - std::conj(value)) > 1e-10 * (1.0 + std::abs(value)))
        throw Error(ErrorCode::BadRange, "transfer function violates conjugate symmetry at omega = " +
                                             std::to_string(w));
    }
    rep.margins[i] = value.real() + inv_mu0;
    if (w >= outer) k_sup = std::max(k_sup, w * std::abs(value));
  }
  const auto it = std::min_element(rep.margins.begin(), rep.margins.end());
  rep.min_margin = *it;
  rep.argmin_omega = rep.omega_grid[static_cast<std::size_t>(it - rep.margins.begin())];
  rep.tail_constant = opts.tail_safety * k_sup;
  rep.tail_bound = inv_mu0 - rep.tail_constant / opts.omega_max;
  rep.satisfied = rep.min_margin > 0.0 && rep.tail_bound > 0.0;
  return rep;
}

FrequencyReport certify_condition(const Transfer& transfer, double nu, double mu0, double omega_max,
                                  int n_omega) {
  SweepOptions opts;
  opts.omega_max = omega_max;
  opts.n_omega = n_omega;
  return certify_condition(transfer, nu, mu0, opts);
}

}  // namespace rplab
