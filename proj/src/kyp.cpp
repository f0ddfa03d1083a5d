#include "rplab/kyp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "rplab/error.hpp"

namespace rplab {

namespace {

using CMat = Eigen::MatrixXcd;
using Cx = std::complex<double>;

// Swap the adjacent diagonal entries k, k+1 of the triangular T with a unitary
// Givens rotation, updating the Schur vectors U.
void swap_adjacent(CMat& T, CMat& U, Eigen::Index k) {
  const Eigen::Index m = T.rows();
  const Cx t11 = T(k, k), t22 = T(k + 1, k + 1);
  const Cx f = T(k, k + 1), g = t22 - t11;
  const double r = std::hypot(std::abs(f), std::abs(g));
  if (r == 0.0) return;
  const double c = std::abs(f) / r;
  const Cx s = std::abs(f) == 0.0 ? std::conj(g) / std::abs(g) : (f / std::abs(f)) * std::conj(g) / r;
  for (Eigen::Index j = k + 2; j < m; ++j) {
    const Cx x = T(k, j), y = T(k + 1, j);
    T(k, j) = c * x + s * y;
    T(k + 1, j) = c * y - std::conj(s) * x;
  }
  const Cx sc = std::conj(s);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Cx x = T(i, k), y = T(i, k + 1);
    T(i, k) = c * x + sc * y;
    T(i, k + 1) = c * y - s * x;
  }
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Cx x = U(i, k), y = U(i, k + 1);
    U(i, k) = c * x + sc * y;
    U(i, k + 1) = c * y - s * x;
  }
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

KypProblem KypProblem::standard(const LinearModel& model, double nu, double mu0) {
  KypProblem prob{model, nu, mu0, {Mat::Zero(model.n(), model.n()), 0.5 * mu0 * model.C, -1.0}};
  prob.validate();
  return prob;
}

KypProblem KypProblem::sector(const LinearModel& model, double nu, double mu1, double mu2) {
  if (!(mu2 > mu1)) throw Error(ErrorCode::BadParams, "sector form needs mu2 > mu1");
  const Mat cct = model.C * model.C.transpose();
  KypProblem prob{model, nu, mu2, {-mu1 * mu2 * cct, 0.5 * (mu1 + mu2) * model.C, -1.0}};
  prob.validate();
  return prob;
}

Mat KypProblem::shifted_a() const { return model.A + nu * Mat::Identity(model.n(), model.n()); }

void KypProblem::validate() const {
  const Eigen::Index n = model.n();
  if (form.F1.rows() != n || form.F1.cols() != n || form.F2.size() != n || model.B.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "quadratic form does not match the model dimension");
  if (!(form.F3 < 0.0)) throw Error(ErrorCode::BadParams, "F3 must be negative");
  if ((form.F1 - form.F1.transpose()).norm() > 1e-12 * (1.0 + form.F1.norm()))
    throw Error(ErrorCode::NonSymmetric, "F1 must be symmetric");
  if (!std::isfinite(nu)) throw Error(ErrorCode::BadParams, "nu must be finite");
}

Mat solve_riccati(const KypProblem& prob, double delta, double* residual, double imag_axis_tol) {
  prob.validate();
  const Eigen::Index n = prob.model.n();
  const double R = -prob.form.F3 - delta;
  if (!(R > 0.0)) throw Error(ErrorCode::Infeasible, "delta must be smaller than |F3|");

  // Work in M-orthonormal coordinates w = L^T u (M = L L^T): the delay history
  // weights otherwise spread the Hamiltonian over many orders of magnitude.
  const Mat& L = prob.model.M.cholesky_lower();
  const auto Lt = L.triangularView<Eigen::Lower>();
  const auto LT = L.transpose().triangularView<Eigen::Upper>();
  const Mat Ah = LT * Mat(Lt.solve(prob.shifted_a().transpose()).transpose());  // L^T Ahat L^{-T}
  const Vec B = LT * prob.model.B;
  const Vec F2 = Lt.solve(prob.form.F2);
  const Mat F1 = Lt.solve(Mat(Lt.solve(prob.form.F1).transpose()));
  const Mat At = Ah + B * F2.transpose() / R;
  const Mat G = B * B.transpose() / R;
  const Mat Qt = F1 + delta * Mat::Identity(n, n) + F2 * F2.transpose() / R;

  Mat H(2 * n, 2 * n);
  H << At, -G, Qt, -At.transpose();
  const double hnorm = H.norm();

  // Ordered complex Schur form: the stable eigenvalues lead.
  Eigen::ComplexSchur<CMat> schur(H.cast<Cx>());
  if (schur.info() != Eigen::Success) throw Error(ErrorCode::NearSingular, "Schur decomposition did not converge");
  CMat T = schur.matrixT();
  CMat Z = schur.matrixU();

  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < 2 * n; ++i) closest = std::min(closest, std::abs(T(i, i).real()));
  if (closest <= imag_axis_tol * std::max(1.0, hnorm))
    throw Error(ErrorCode::HamiltonianImaginaryAxis,
                "Hamiltonian eigenvalue within " + std::to_string(closest) + " of the imaginary axis");

  Eigen::Index sdim = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (T(i, i).real() >= 0.0) continue;
    for (Eigen::Index k = i; k > sdim; --k) swap_adjacent(T, Z, k - 1);
    ++sdim;
  }
  if (sdim != n)
    throw Error(ErrorCode::Infeasible, "Hamiltonian has " + std::to_string(sdim) + " stable eigenvalues, expected " +
                                           std::to_string(n));

  const CMat U1 = Z.topLeftCorner(n, n);
  const CMat U2 = Z.bottomLeftCorner(n, n);
  const Eigen::PartialPivLU<CMat> lu(U1.transpose());
  if (lu.rcond() < 1e-13) throw Error(ErrorCode::NearSingular, "stable subspace is not a graph over the state space");
  const CMat Xc = lu.solve(U2.transpose()).transpose();
  const Mat X = Xc.real();
  if (Xc.imag().norm() > 1e-6 * std::max(1e-300, X.norm()))
    throw Error(ErrorCode::NearSingular, "Riccati solution is not real");
  const double asym = (X - X.transpose()).norm() / std::max(1e-300, X.norm());
  if (asym > 1e-6) throw Error(ErrorCode::NearSingular, "Riccati solution is not symmetric (" + std::to_string(asym) + ")");
  const Mat Xw = -0.5 * (X + X.transpose());

  const Vec S = Xw * B + F2;
  const Mat res = Ah.transpose() * Xw + Xw * Ah + Qt - F2 * F2.transpose() / R + S * S.transpose() / R;
  const double scale = 2.0 * (Ah.transpose() * Xw).norm() + Qt.norm() + S.squaredNorm() / R + 1e-300;
  const double rel = res.norm() / scale;
  if (residual) *residual = rel;
  if (!(rel < 1e-8)) throw Error(ErrorCode::NearSingular, "Riccati residual " + std::to_string(rel));

  Eigen::EigenSolver<Mat> closed(At + G * Xw, false);
  if (closed.eigenvalues().real().maxCoeff() >= 0.0)
    throw Error(ErrorCode::Infeasible, "Riccati solution is not stabilizing");
  const Mat form = L * Xw * L.transpose();
  return 0.5 * (form + form.transpose());
}

double kyp_margin_of_form(const Mat& form, const KypProblem& prob) {
  const Eigen::Index n = prob.model.n();
  if (form.rows() != n || form.cols() != n) throw Error(ErrorCode::DimensionMismatch, "form size mismatch");
  const Mat Ah = prob.shifted_a();
  Mat blk(n + 1, n + 1);
  blk.topLeftCorner(n, n) = Ah.transpose() * form + form * Ah + prob.form.F1;
  const Vec S = form * prob.model.B + prob.form.F2;
  blk.topRightCorner(n, 1) = S;
  blk.bottomLeftCorner(1, n) = S.transpose();
  blk(n, n) = prob.form.F3;
  blk = 0.5 * (blk + blk.transpose());

  // Metric diag(M, 1): congruence by blockdiag(L, 1)^{-1}.
  Mat L = Mat::Identity(n + 1, n + 1);
  L.topLeftCorner(n, n) = prob.model.M.cholesky_lower();
  const auto Lt = L.triangularView<Eigen::Lower>();
  const Mat tmp = Lt.solve(blk);
  const Mat K = Lt.solve(tmp.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (K + K.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double kyp_margin(const QuadraticCertificate& cert, const KypProblem& prob) {
  return kyp_margin_of_form(cert.form, prob);
}

KypSolution solve_kyp(const KypProblem& prob, const KypOptions& opts) {
  prob.validate();
  const double cap = 0.5 * std::abs(prob.form.F3);
  double delta = std::min(opts.delta_seed.value_or(1e-2 * prob.shifted_a().norm()), cap);
  const double seed_value = delta;
  if (!(delta > 0.0)) delta = cap;

  std::string last_reason = "no attempt";
  int attempts = 0;
  for (; delta >= opts.min_delta; delta *= 0.5) {
    if (opts.stop.stop_requested()) throw Error(ErrorCode::Cancelled, "KYP solve cancelled");
    ++attempts;
    try {
      double residual = 0.0;
      const Mat form = solve_riccati(prob, delta, &residual, opts.imag_axis_tol);
      const double margin = kyp_margin_of_form(form, prob);
      if (!(margin < 0.0)) {
        last_reason = "margin " + std::to_string(margin) + " at delta " + std::to_string(delta);
        continue;
      }
      KypSolution sol;
      sol.cert = QuadraticCertificate::from_form(form, prob.model.M, prob.nu, std::min(delta, -margin), prob.mu0);
      sol.kyp_margin = margin;
      sol.feasible = true;
      sol.riccati_residual = residual;
      sol.delta_attempts = attempts;
      return sol;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DimensionMismatch || e.code() == ErrorCode::BadParams) throw;
      last_reason = e.what();
    }
  }
  throw Error(ErrorCode::Infeasible,
              "no delta in [" + format_g(opts.min_delta) + ", " + format_g(seed_value) + "] gives a certificate; last: " + last_reason);
}

int unstable_dimension(const KypProblem& prob) {
  Eigen::EigenSolver<Mat> es(prob.shifted_a(), false);
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i).real() > 0.0) ++count;
  return count;
}

bool audit_inertia(const KypSolution& sol, const KypProblem& prob) {
  if (!sol.feasible) return false;
  return sol.cert.inertia.n_zero == 0 && sol.cert.inertia.n_neg == unstable_dimension(prob);
}

}  // namespace rplab
