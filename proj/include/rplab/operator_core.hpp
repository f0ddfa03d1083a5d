#pragma once

// Weighted symmetric eigenstructure, the quadratic form V(u) = (Pu, u) and the
// projector onto the negative subspace of P.
//
// Operators are stored in coordinates of a finite basis whose Gram matrix is
// the mass matrix M, so the Hilbert inner product is (u, v) = u^T M v. An
// operator S is self-adjoint in that inner product iff M S is symmetric.

#include <Eigen/Dense>
#include <optional>

namespace rplab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class MassMatrix {
 public:
  /// Validates symmetry (1e-12 relative) and positive definiteness.
  explicit MassMatrix(Mat entries);

  static MassMatrix identity(Eigen::Index n) { return MassMatrix(Mat::Identity(n, n)); }

  Eigen::Index size() const { return m_.rows(); }
  const Mat& matrix() const { return m_; }
  bool is_diagonal() const { return diagonal_; }
  const Vec& diagonal() const { return diag_; }

  /// Lower Cholesky factor L with M = L L^T.
  const Mat& cholesky_lower() const { return chol_; }
  double smallest_eigenvalue() const { return lambda_min_; }

  double inner(const Vec& u, const Vec& v) const;
  double norm_squared(const Vec& u) const;
  double norm(const Vec& u) const;
  Vec apply(const Vec& u) const;
  Vec solve(const Vec& rhs) const;
  Mat solve(const Mat& rhs) const;

 private:
  Mat m_;
  Mat chol_;
  Vec diag_;
  bool diagonal_ = false;
  double lambda_min_ = 0.0;
};

struct Inertia {
  int n_neg = 0;
  int n_zero = 0;
  int n_pos = 0;

  int total() const { return n_neg + n_zero + n_pos; }
  friend bool operator==(const Inertia&, const Inertia&) = default;
};

/// Eigenpairs sorted ascending; the columns of `vectors` are M-orthonormal and
/// oriented so that their entry of largest magnitude is positive.
struct EigenDecomposition {
  Vec values;
  Mat vectors;
};

/// Solves S v = lambda v for an S that is self-adjoint in the M-inner product.
/// Throws NonSymmetric if (MS) fails symmetry to 1e-10 relative.
EigenDecomposition generalized_eigen(const Mat& S, const MassMatrix& M);

/// Same problem posed through the symmetric form matrix F = M S directly.
EigenDecomposition eigen_of_form(const Mat& form, const MassMatrix& M);

/// Default zero tolerance: 1e-8 times the largest eigenvalue magnitude.
Inertia inertia_of(const Mat& S, const MassMatrix& M, std::optional<double> zero_tol = std::nullopt);
Inertia inertia_from_values(const Vec& ascending_values, std::optional<double> zero_tol = std::nullopt);

/// Flips v so that its first entry within 1e-10 of the largest magnitude is positive.
void orient_column(Eigen::Ref<Vec> v);

struct QuadraticCertificate {
  Mat P;      // operator in coordinates, self-adjoint in the M-inner product
  Mat form;   // symmetric matrix M P, so V(u) = u^T form u
  double nu = 0.0;
  double delta = 0.0;
  double mu0 = 0.0;
  Inertia inertia;
  Vec eigenvalues;  // ascending
  Mat neg_basis;    // M-orthonormal columns spanning the negative eigenspace

  Eigen::Index dim() const { return P.rows(); }
  int j() const { return inertia.n_neg; }

  /// Builds the certificate from the symmetric form matrix M P.
  static QuadraticCertificate from_form(const Mat& form, const MassMatrix& M, double nu, double delta,
                                        double mu0);
  static QuadraticCertificate from_operator(const Mat& P, const MassMatrix& M, double nu, double delta,
                                            double mu0);

  /// Same certificate with P replaced by -P (used for falsification controls).
  QuadraticCertificate negated(const MassMatrix& M) const;
};

/// V(u) = (P u, u)_M.
double quadratic_form(const QuadraticCertificate& cert, const MassMatrix& M, const Vec& u);

/// Coordinates (e_i, u)_M against the oriented negative basis.
Vec project_negative(const QuadraticCertificate& cert, const MassMatrix& M, const Vec& u);

}  // namespace rplab
