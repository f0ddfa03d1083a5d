#include "rplab/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rplab/error.hpp"

namespace rplab {

SampledFunction::SampledFunction(double lo, double hi, std::vector<double> samples)
    : lo_(lo), hi_(hi), samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(ErrorCode::BadParams, "sampled function needs at least one sample");
  if (!(hi_ > lo_)) throw Error(ErrorCode::BadParams, "sampled function needs hi > lo");
  for (double s : samples_)
    if (!std::isfinite(s)) throw Error(ErrorCode::BadParams, "sampled function has non-finite samples");
}

double SampledFunction::operator()(double x) const {
  if (samples_.size() == 1) return samples_.front();
  const double n = static_cast<double>(samples_.size() - 1);
  const double pos = (x - lo_) / (hi_ - lo_) * n;
  if (pos <= 0.0) return samples_.front();
  if (pos >= n) return samples_.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= samples_.size()) return samples_.back();
  return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
}

bool SampledFunction::is_zero() const {
  return std::all_of(samples_.begin(), samples_.end(), [](double s) { return s == 0.0; });
}

std::vector<double> SampledFunction::breakpoints() const {
  const std::size_t segs = samples_.size() > 1 ? samples_.size() - 1 : 1;
  std::vector<double> out(segs + 1);
  for (std::size_t i = 0; i <= segs; ++i)
    out[i] = lo_ + (hi_ - lo_) * static_cast<double>(i) / static_cast<double>(segs);
  return out;
}

std::vector<double> simpson_weights(int n_intervals, double lo, double hi) {
  if (n_intervals < 2 || n_intervals % 2 != 0)
    throw Error(ErrorCode::BadParams, "Simpson rule needs an even number of intervals");
  const double h = (hi - lo) / n_intervals;
  std::vector<double> w(static_cast<std::size_t>(n_intervals) + 1);
  for (int i = 0; i <= n_intervals; ++i) {
    const double c = (i == 0 || i == n_intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[static_cast<std::size_t>(i)] = c * h / 3.0;
  }
  return w;
}

std::vector<double> trapezoid_weights(int n_intervals, double lo, double hi) {
  if (n_intervals < 1) throw Error(ErrorCode::BadParams, "trapezoid rule needs at least one interval");
  const double h = (hi - lo) / n_intervals;
  std::vector<double> w(static_cast<std::size_t>(n_intervals) + 1, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

void DelayParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::BadParams, "lambda must be > 0");
  if (b != 1.0 && b != -1.0) throw Error(ErrorCode::BadParams, "b must be +1 or -1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::BadParams, "tau must be > 0");
  if (n_grid < 8) throw Error(ErrorCode::BadParams, "n_grid must be >= 8");
  if (std::abs(rho.lo() + tau) > 1e-12 * tau || std::abs(rho.hi()) > 1e-12 * tau)
    throw Error(ErrorCode::BadParams, "rho must be sampled on [-tau, 0]");
}

int ParabolicParams::quadrature_intervals() const {
  int n = n_quad > 0 ? n_quad : std::max(2048, 64 * n_modes);
  if (n % 2 != 0) ++n;
  return n;
}

double ParabolicParams::mode_eigenvalue(int k) const {
  const double kk = static_cast<double>(k);
  return -alpha * std::numbers::pi * std::numbers::pi * kk * kk - beta;
}

void ParabolicParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::BadParams, "alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::BadParams, "beta must be > 0");
  if (n_modes < 4) throw Error(ErrorCode::BadParams, "n_modes must be >= 4");
  if (n_quad < 0) throw Error(ErrorCode::BadParams, "n_quad must be >= 0");
  if (std::abs(rho.lo()) > 1e-12 || std::abs(rho.hi() - 1.0) > 1e-12)
    throw Error(ErrorCode::BadParams, "rho must be sampled on [0, 1]");
}

bool LinearModel::a_is_diagonal() const {
  const Mat off = A - Mat(A.diagonal().asDiagonal());
  return off.cwiseAbs().maxCoeff() == 0.0;
}

LinearModel build_delay_model(const DelayParams& p) {
  p.validate();
  const int N = p.n_grid;
  const Eigen::Index n = N + 1;
  const double h = p.grid_step();

  Mat A = Mat::Zero(n, n);
  A(0, 0) = -p.lambda;
  for (int i = 0; i < N; ++i) {
    const Eigen::Index row = 1 + i;
    A(row, row) = -1.0 / h;
    const Eigen::Index right = (i + 1 < N) ? row + 1 : 0;  // phi(0) is x
    A(row, right) = 1.0 / h;
  }

  Vec B = Vec::Zero(n);
  B(0) = p.b;

  const std::vector<double> w = trapezoid_weights(N, -p.tau, 0.0);
  Vec C(n);
  for (int i = 0; i < N; ++i) C(1 + i) = w[static_cast<std::size_t>(i)] * p.rho(-p.tau + i * h);
  C(0) = w.back() * p.rho(0.0);

  Vec mdiag(n);
  mdiag(0) = 1.0;
  for (int i = 0; i < N; ++i) mdiag(1 + i) = w[static_cast<std::size_t>(i)];

  return LinearModel{std::move(A), std::move(B), std::move(C), MassMatrix(Mat(mdiag.asDiagonal())),
                     ModelKind::Delay, p};
}

LinearModel build_parabolic_model(const ParabolicParams& p) {
  p.validate();
  const int K = p.n_modes;
  const int nq = p.quadrature_intervals();
  const std::vector<double> w = simpson_weights(nq, 0.0, 1.0);

  Mat A = Mat::Zero(K, K);
  Vec B(K);
  Vec C = Vec::Zero(K);
  Vec mdiag(K);
  for (int k = 0; k < K; ++k) {
    A(k, k) = p.mode_eigenvalue(k);
    mdiag(k) = k == 0 ? 1.0 : 0.5;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    B(k) = p.alpha * sign / mdiag(k);
  }
  const double pi = std::numbers::pi;
  for (int i = 0; i <= nq; ++i) {
    const double x = static_cast<double>(i) / nq;
    const double wr = w[static_cast<std::size_t>(i)] * p.rho(x);
    if (wr == 0.0) continue;
    for (int k = 0; k < K; ++k) C(k) += wr * std::cos(k * pi * x);
  }
  return LinearModel{std::move(A), std::move(B), std::move(C), MassMatrix(Mat(mdiag.asDiagonal())),
                     ModelKind::Parabolic, p};
}

}  // namespace rplab
