#pragma once

// Transfer functions W(p) = C (A - p I)^{-1} B of the model problems and the
// frequency-domain condition  Re W(i omega - nu) + 1/mu0 > 0  for all real omega.

#include <complex>
#include <functional>
#include <vector>

#include "rplab/discretization.hpp"

namespace rplab {

using Complex = std::complex<double>;
using Transfer = std::function<Complex(Complex)>;

/// -b/(lambda + p) * int_{-tau}^0 rho(s) e^{p s} ds, integrated exactly on
/// each linear piece of rho. Throws PoleAt near p = -lambda.
Complex delay_transfer(Complex p, const DelayParams& params);

/// -int_0^1 rho(x) cosh(z x) / (z sinh z) dx with z = sqrt((p + beta)/alpha),
/// composite Simpson on the model's quadrature nodes. Throws PoleAt within
/// 1e-10 of a mode eigenvalue.
Complex parabolic_transfer(Complex p, const ParabolicParams& params);

/// Same integral evaluated with the root -z through cosh/sinh directly; the
/// result must not depend on the branch.
Complex parabolic_transfer_negated_root(Complex p, const ParabolicParams& params);

/// Largest |W(p; z) - W(p; -z)| / (1 + |W|) over `points` pseudo-random p in
/// the right half-plane shifted left by nu_max.
double parabolic_branch_discrepancy(const ParabolicParams& params, int points, unsigned seed);

/// C (A - pI)^{-1} B with a residual check (<= 1e-9 |B|); throws NearSingular.
Complex generic_transfer(const LinearModel& model, Complex p);

Transfer delay_evaluator(const DelayParams& params);
Transfer parabolic_evaluator(const ParabolicParams& params);
Transfer generic_evaluator(const LinearModel& model);

struct FrequencyReport {
  double nu = 0.0;
  double mu0 = 0.0;
  std::vector<double> omega_grid;  // omega >= 0; margins are even in omega
  std::vector<double> margins;     // Re W(i omega - nu) + 1/mu0
  double min_margin = 0.0;
  double argmin_omega = 0.0;
  double tail_constant = 0.0;  // K with |W(i omega - nu)| <= K/|omega| beyond the grid
  double tail_bound = 0.0;     // 1/mu0 - K/omega_max
  bool satisfied = false;
};

struct SweepOptions {
  double omega_min = 1e-3;
  double omega_max = 1e3;
  int n_omega = 2048;
  double tail_safety = 2.0;
};

/// Sweeps omega = 0 plus n_omega - 1 log-spaced points in [omega_min, omega_max].
/// mu0 may be +infinity. Throws BadRange for an unusable grid or when nu puts a
/// pole of W on the sweep line.
FrequencyReport certify_condition(const Transfer& transfer, double nu, double mu0,
                                  const SweepOptions& opts = {});

FrequencyReport certify_condition(const Transfer& transfer, double nu, double mu0, double omega_max,
                                  int n_omega);

}  // namespace rplab
