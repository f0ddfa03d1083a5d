#pragma once

// Finite-dimensional Kalman-Yakubovich-Popov inequality
//
//   2((A + nu I) u + B xi, P u) + F(u, xi) <= -delta (|u|^2 + xi^2)
//
// with F(u, xi) = (F1 u, u) + 2 xi F2 u + F3 xi^2. All inner products are taken
// in the M-metric of the model; the unknown is stored as the symmetric form
// matrix Phat = M P.

#include <optional>
#include <stop_token>
#include <string>

#include "rplab/discretization.hpp"
#include "rplab/operator_core.hpp"

namespace rplab {

struct QuadraticFormTriple {
  Mat F1;     // n x n symmetric
  Vec F2;     // the row F2 stored as a vector
  double F3;  // must be negative
};

struct KypProblem {
  LinearModel model;
  double nu = 0.0;
  double mu0 = 0.0;
  QuadraticFormTriple form;

  /// F(u, xi) = xi (mu0 C u - xi).
  static KypProblem standard(const LinearModel& model, double nu, double mu0);
  /// F(u, xi) = (xi - mu1 C u)(mu2 C u - xi); mu0 is recorded as mu2.
  static KypProblem sector(const LinearModel& model, double nu, double mu1, double mu2);

  Mat shifted_a() const;
  void validate() const;
};

struct KypSolution {
  QuadraticCertificate cert;
  double kyp_margin = 0.0;
  bool feasible = false;
  double riccati_residual = 0.0;
  int delta_attempts = 0;
};

struct KypOptions {
  std::optional<double> delta_seed;  // default 1e-2 |A + nu I|_F, capped at |F3|/2
  double min_delta = 1e-12;
  double imag_axis_tol = 1e-9;  // relative to |H|_F
  std::stop_token stop;
};

/// Stabilizing solution of the Riccati equation obtained from the block
/// inequality by a Schur complement in xi, for one fixed delta. Returns Phat.
/// Throws HamiltonianImaginaryAxis, NearSingular or Infeasible.
Mat solve_riccati(const KypProblem& prob, double delta, double* residual = nullptr,
                  double imag_axis_tol = 1e-9);

/// Halves delta from the seed until the Riccati solution certifies a negative
/// margin. Throws Infeasible when no delta in [min_delta, seed] works.
KypSolution solve_kyp(const KypProblem& prob, const KypOptions& opts = {});

/// Most positive eigenvalue of the block matrix
///   [ (A+nu)^T Phat + Phat (A+nu) + F1 ,  Phat B + F2^T ;  B^T Phat + F2 ,  F3 ]
/// measured in the diag(M, 1) metric. A valid certificate has margin <= -delta.
double kyp_margin(const QuadraticCertificate& cert, const KypProblem& prob);
double kyp_margin_of_form(const Mat& form, const KypProblem& prob);

/// Number of eigenvalues of A + nu I with positive real part.
int unstable_dimension(const KypProblem& prob);

/// True iff P has trivial kernel and as many negative directions as A + nu I
/// has unstable eigenvalues.
bool audit_inertia(const KypSolution& sol, const KypProblem& prob);

}  // namespace rplab
