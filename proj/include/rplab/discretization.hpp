#pragma once

// Finite-dimensional truncations (A, B, C, M) of the two model problems:
//
//   delay:      x' = -lambda x + b f(t, v) + g(t),  v(t) = int_{-tau}^0 rho(s) x(t+s) ds
//   parabolic:  u_t = alpha u_xx - beta u + g0,  u_x(0) = 0, boundary feedback at x = 1,
//               v(t) = int_0^1 rho(x) u(t,x) dx
//
// State vectors are coordinates; the Hilbert inner product is carried by M.

#include <memory>
#include <variant>
#include <vector>

#include "rplab/operator_core.hpp"

namespace rplab {

/// Samples on a uniform grid over [lo, hi] with linear interpolation and
/// constant extrapolation. A single sample means a constant function.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(double lo, double hi, std::vector<double> samples);

  static SampledFunction constant(double lo, double hi, double value) { return {lo, hi, {value, value}}; }

  double operator()(double x) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& samples() const { return samples_; }
  bool is_zero() const;

  /// Interval breakpoints between which the function is linear.
  std::vector<double> breakpoints() const;

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> samples_{0.0};
};

struct DelayParams {
  double lambda = 1.0;
  double b = 1.0;
  double tau = 1.0;
  SampledFunction rho = SampledFunction::constant(-1.0, 0.0, 1.0);  // on [-tau, 0]
  int n_grid = 32;

  double grid_step() const { return tau / n_grid; }
  void validate() const;
};

struct ParabolicParams {
  double alpha = 1.0;
  double beta = 1.0;
  SampledFunction rho = SampledFunction::constant(0.0, 1.0, 1.0);  // on [0, 1]
  int n_modes = 8;
  int n_quad = 0;  // Simpson intervals; 0 selects max(2048, 64 n_modes)

  int quadrature_intervals() const;
  /// Eigenvalue -alpha pi^2 k^2 - beta of mode k.
  double mode_eigenvalue(int k) const;
  void validate() const;
};

enum class ModelKind { Delay, Parabolic };

struct LinearModel {
  Mat A;
  Vec B;
  Vec C;  // output row stored as a column vector: v = C . u
  MassMatrix M;
  ModelKind kind;
  std::variant<DelayParams, ParabolicParams> params;

  Eigen::Index n() const { return A.rows(); }
  bool a_is_diagonal() const;
  const DelayParams& delay() const { return std::get<DelayParams>(params); }
  const ParabolicParams& parabolic() const { return std::get<ParabolicParams>(params); }
};

/// State layout (x, phi(s_0), ..., phi(s_{N-1})) with s_i = -tau + i tau/N.
/// History rows are forward (upwind) differences for d/ds with phi(0) := x.
/// C is the trapezoid rule over s_0..s_N (the s_N = 0 node reads x);
/// M = diag(1, Delta/2, Delta, ..., Delta).
LinearModel build_delay_model(const DelayParams& p);

/// Cosine Galerkin basis cos(k pi x), k = 0..n_modes-1. A is diagonal,
/// M = diag(1, 1/2, ...), B is the operator M^{-1} b with load
/// b_k = alpha cos(k pi), C_k = int rho cos(k pi x) by composite Simpson.
LinearModel build_parabolic_model(const ParabolicParams& p);

/// Composite Simpson weights for n_intervals (even) uniform intervals on [lo, hi].
std::vector<double> simpson_weights(int n_intervals, double lo, double hi);

/// Trapezoid weights for n_intervals uniform intervals on [lo, hi].
std::vector<double> trapezoid_weights(int n_intervals, double lo, double hi);

}  // namespace rplab
