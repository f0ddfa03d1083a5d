#include "rplab/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rplab/error.hpp"
#include "rplab/kernels/kernels.hpp"

namespace rplab {

namespace {

constexpr double kMassSymTol = 1e-12;
constexpr double kFormSymTol = 1e-10;

double relative_asymmetry(const Mat& a) {
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).norm() / scale;
}

}  // namespace

MassMatrix::MassMatrix(Mat entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "mass matrix must be square and non-empty");
  if (!m_.allFinite()) throw Error(ErrorCode::SingularMass, "mass matrix has non-finite entries");
  if (relative_asymmetry(m_) > kMassSymTol)
    throw Error(ErrorCode::NonSymmetric, "mass matrix is not symmetric");
  m_ = 0.5 * (m_ + m_.transpose());

  const Mat off = m_ - Mat(m_.diagonal().asDiagonal());
  diagonal_ = off.cwiseAbs().maxCoeff() == 0.0;
  diag_ = m_.diagonal();

  if (diagonal_) {
    lambda_min_ = diag_.minCoeff();
    if (!(lambda_min_ > 0.0))
      throw Error(ErrorCode::SingularMass, "mass matrix has eigenvalue " + std::to_string(lambda_min_));
    chol_ = Mat(diag_.cwiseSqrt().asDiagonal());
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  lambda_min_ = es.eigenvalues()(0);
  if (!(lambda_min_ > 0.0))
    throw Error(ErrorCode::SingularMass, "mass matrix has eigenvalue " + std::to_string(lambda_min_));
  Eigen::LLT<Mat> llt(m_);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "Cholesky factorization failed");
  chol_ = llt.matrixL();
}

double MassMatrix::inner(const Vec& u, const Vec& v) const {
  if (u.size() != size() || v.size() != size())
    throw Error(ErrorCode::DimensionMismatch, "inner product dimension mismatch");
  if (diagonal_) {
    const Vec wu = diag_.cwiseProduct(u);
    return kernels::dot({wu.data(), static_cast<std::size_t>(wu.size())},
                        {v.data(), static_cast<std::size_t>(v.size())});
  }
  return u.dot(m_ * v);
}

double MassMatrix::norm_squared(const Vec& u) const {
  if (u.size() != size()) throw Error(ErrorCode::DimensionMismatch, "norm dimension mismatch");
  if (diagonal_)
    return kernels::weighted_sum_squares({diag_.data(), static_cast<std::size_t>(diag_.size())},
                                         {u.data(), static_cast<std::size_t>(u.size())});
  return u.dot(m_ * u);
}

double MassMatrix::norm(const Vec& u) const { return std::sqrt(std::max(0.0, norm_squared(u))); }

Vec MassMatrix::apply(const Vec& u) const {
  if (diagonal_) return diag_.cwiseProduct(u);
  return m_ * u;
}

Vec MassMatrix::solve(const Vec& rhs) const {
  if (diagonal_) return rhs.cwiseQuotient(diag_);
  const auto L = chol_.triangularView<Eigen::Lower>();
  return L.transpose().solve(L.solve(rhs));
}

Mat MassMatrix::solve(const Mat& rhs) const {
  if (diagonal_) return diag_.cwiseInverse().asDiagonal() * rhs;
  const auto L = chol_.triangularView<Eigen::Lower>();
  return L.transpose().solve(L.solve(rhs));
}

void orient_column(Eigen::Ref<Vec> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= peak * (1.0 - 1e-10)) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

EigenDecomposition eigen_of_form(const Mat& form, const MassMatrix& M) {
  if (form.rows() != M.size() || form.cols() != M.size())
    throw Error(ErrorCode::DimensionMismatch, "form and mass matrix sizes differ");
  if (relative_asymmetry(form) > kFormSymTol)
    throw Error(ErrorCode::NonSymmetric, "M S is not symmetric to 1e-10 relative");
  const Mat sym = 0.5 * (form + form.transpose());

  // K = L^{-1} (M S) L^{-T}, eigenvectors mapped back with v = L^{-T} w.
  const auto L = M.cholesky_lower().triangularView<Eigen::Lower>();
  const Mat tmp = L.solve(sym);
  const Mat K = L.solve(tmp.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (K + K.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NearSingular, "symmetric eigensolver failed");

  EigenDecomposition out;
  out.values = es.eigenvalues();
  out.vectors = L.transpose().solve(es.eigenvectors());
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) orient_column(out.vectors.col(c));
  return out;
}

EigenDecomposition generalized_eigen(const Mat& S, const MassMatrix& M) {
  if (S.rows() != M.size() || S.cols() != M.size())
    throw Error(ErrorCode::DimensionMismatch, "operator and mass matrix sizes differ");
  return eigen_of_form(M.matrix() * S, M);
}

Inertia inertia_from_values(const Vec& values, std::optional<double> zero_tol) {
  const double largest = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  const double tol = zero_tol.value_or(1e-8 * largest);
  Inertia in;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < -tol)
      ++in.n_neg;
    else if (values(i) > tol)
      ++in.n_pos;
    else
      ++in.n_zero;
  }
  return in;
}

Inertia inertia_of(const Mat& S, const MassMatrix& M, std::optional<double> zero_tol) {
  return inertia_from_values(generalized_eigen(S, M).values, zero_tol);
}

QuadraticCertificate QuadraticCertificate::from_form(const Mat& form, const MassMatrix& M, double nu,
                                                     double delta, double mu0) {
  const EigenDecomposition eig = eigen_of_form(form, M);
  QuadraticCertificate cert;
  cert.form = 0.5 * (form + form.transpose());
  cert.P = M.solve(cert.form);
  cert.nu = nu;
  cert.delta = delta;
  cert.mu0 = mu0;
  cert.eigenvalues = eig.values;
  cert.inertia = inertia_from_values(eig.values);
  cert.neg_basis = eig.vectors.leftCols(cert.inertia.n_neg);
  return cert;
}

QuadraticCertificate QuadraticCertificate::from_operator(const Mat& P, const MassMatrix& M, double nu,
                                                         double delta, double mu0) {
  if (P.rows() != M.size() || P.cols() != M.size())
    throw Error(ErrorCode::DimensionMismatch, "operator and mass matrix sizes differ");
  return from_form(M.matrix() * P, M, nu, delta, mu0);
}

QuadraticCertificate QuadraticCertificate::negated(const MassMatrix& M) const {
  return from_form(-form, M, nu, delta, mu0);
}

double quadratic_form(const QuadraticCertificate& cert, const MassMatrix& M, const Vec& u) {
  if (u.size() != cert.dim() || M.size() != cert.dim())
    throw Error(ErrorCode::DimensionMismatch, "quadratic form dimension mismatch");
  return u.dot(cert.form * u);
}

Vec project_negative(const QuadraticCertificate& cert, const MassMatrix& M, const Vec& u) {
  if (cert.inertia.n_neg == 0) throw Error(ErrorCode::NoNegativeSpace, "P has no negative eigenvalues");
  if (u.size() != cert.dim() || M.size() != cert.dim())
    throw Error(ErrorCode::DimensionMismatch, "projection dimension mismatch");
  return cert.neg_basis.transpose() * M.apply(u);
}

}  // namespace rplab
