#include <cmath>
#include <random>

#include "doctest.h"
#include "rplab/error.hpp"
#include "rplab/operator_core.hpp"

using namespace rplab;

namespace {

Mat diag3(double a, double b, double c) {
  Mat m = Mat::Zero(3, 3);
  m.diagonal() << a, b, c;
  return m;
}

Mat random_spd(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Mat r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = d(rng);
  return r * r.transpose() + static_cast<double>(n) * Mat::Identity(n, n);
}

Mat random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Mat r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = d(rng);
  return Eigen::HouseholderQR<Mat>(r).householderQ();
}

void check_throws_code(auto&& fn, ErrorCode code) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("MassMatrix validation") {
  check_throws_code([] { MassMatrix m(Mat{{1.0, 0.5}, {0.4, 1.0}}); }, ErrorCode::NonSymmetric);
  check_throws_code([] { MassMatrix m(Mat{{1.0, 0.0}, {0.0, -1.0}}); }, ErrorCode::SingularMass);
  check_throws_code([] { MassMatrix m(Mat{{1.0, 0.0}, {0.0, 0.0}}); }, ErrorCode::SingularMass);
  const MassMatrix m(Mat{{2.0, 0.0}, {0.0, 3.0}});
  CHECK(m.is_diagonal());
  const Vec u{{1.0, 1.0}};
  CHECK(m.norm_squared(u) == doctest::Approx(5.0));
  CHECK(m.solve(m.apply(u)).isApprox(u, 1e-14));
}

TEST_CASE("generalized_eigen: identity") {
  const auto ed = generalized_eigen(Mat::Identity(3, 3), MassMatrix::identity(3));
  for (int i = 0; i < 3; ++i) CHECK(ed.values(i) == doctest::Approx(1.0));
  CHECK((ed.vectors.transpose() * ed.vectors).isApprox(Mat::Identity(3, 3), 1e-12));
}

TEST_CASE("generalized_eigen: diagonal") {
  const auto ed = generalized_eigen(diag3(-2.0, 0.0, 5.0), MassMatrix::identity(3));
  CHECK(ed.values(0) == doctest::Approx(-2.0));
  CHECK(std::abs(ed.values(1)) < 1e-14);
  CHECK(ed.values(2) == doctest::Approx(5.0));
  CHECK(ed.vectors.cwiseAbs().isApprox(Mat::Identity(3, 3), 1e-12));
}

TEST_CASE("generalized_eigen: 2x2 swap matrix") {
  const auto ed = generalized_eigen(Mat{{0.0, 1.0}, {1.0, 0.0}}, MassMatrix::identity(2));
  CHECK(ed.values(0) == doctest::Approx(-1.0));
  CHECK(ed.values(1) == doctest::Approx(1.0));
  // (1,-1)/sqrt2 oriented: first max-magnitude entry positive
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(ed.vectors(0, 0) == doctest::Approx(s));
  CHECK(ed.vectors(1, 0) == doctest::Approx(-s));
  CHECK(ed.vectors(0, 1) == doctest::Approx(s));
  CHECK(ed.vectors(1, 1) == doctest::Approx(s));
}

TEST_CASE("generalized_eigen: weighted residual and M-orthonormality") {
  std::mt19937_64 rng(5);
  const Eigen::Index n = 12;
  const MassMatrix M(random_spd(n, rng));
  // S = M^{-1} F with F symmetric is M-self-adjoint
  const Mat F = random_spd(n, rng) - 20.0 * Mat::Identity(n, n);
  const Mat S = M.solve(F);
  const auto ed = generalized_eigen(S, M);
  for (Eigen::Index i = 1; i < n; ++i) CHECK(ed.values(i) >= ed.values(i - 1));
  const Mat gram = ed.vectors.transpose() * M.matrix() * ed.vectors;
  CHECK((gram - Mat::Identity(n, n)).norm() < 1e-10);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec v = ed.vectors.col(i);
    const double lam = ed.values(i);
    CHECK(M.norm(S * v - lam * v) <= 1e-9 * (1.0 + std::abs(lam)) * M.norm(v));
  }
  const auto viaform = eigen_of_form(F, M);
  CHECK((viaform.values - ed.values).norm() < 1e-9 * ed.values.norm());
}

TEST_CASE("generalized_eigen rejects non-self-adjoint operators") {
  check_throws_code([] { generalized_eigen(Mat{{0.0, 1.0}, {0.0, 0.0}}, MassMatrix::identity(2)); },
                    ErrorCode::NonSymmetric);
}

TEST_CASE("inertia_of") {
  CHECK(inertia_of(diag3(-2.0, 0.0, 5.0), MassMatrix::identity(3), 1e-8) == Inertia{1, 1, 1});
  CHECK(inertia_of(Mat::Identity(4, 4), MassMatrix::identity(4)) == Inertia{0, 0, 4});
  // default zero tolerance is relative to the largest magnitude
  CHECK(inertia_of(diag3(-1.0, 1e-10, 1.0), MassMatrix::identity(3)) == Inertia{1, 1, 1});
  CHECK(inertia_of(diag3(-1.0, 1e-6, 1.0), MassMatrix::identity(3)) == Inertia{1, 0, 2});
}

TEST_CASE("inertia is invariant under orthogonal change of basis") {
  std::mt19937_64 rng(17);
  Mat D = Mat::Zero(6, 6);
  D.diagonal() << -3.0, -0.5, 0.0, 1.0, 2.0, 7.0;
  const Inertia ref = inertia_of(D, MassMatrix::identity(6), 1e-8);
  CHECK(ref == Inertia{2, 1, 3});
  for (int trial = 0; trial < 10; ++trial) {
    const Mat Q = random_orthogonal(6, rng);
    const Mat S = Q * D * Q.transpose();
    CHECK(inertia_of(0.5 * (S + S.transpose()), MassMatrix::identity(6), 1e-8) == ref);
  }
}

TEST_CASE("quadratic_form and project_negative on diag(-1, 1)") {
  const MassMatrix I2 = MassMatrix::identity(2);
  const auto cert = QuadraticCertificate::from_operator(Mat{{-1.0, 0.0}, {0.0, 1.0}}, I2, 1.0, 0.1, 1.0);
  CHECK(cert.inertia == Inertia{1, 0, 1});
  CHECK(quadratic_form(cert, I2, Vec::Zero(2)) == 0.0);
  CHECK(quadratic_form(cert, I2, Vec{{1.0, 0.0}}) == doctest::Approx(-1.0));
  CHECK(quadratic_form(cert, I2, Vec{{1.0, 1.0}}) == doctest::Approx(0.0));
  const Vec pi = project_negative(cert, I2, Vec{{3.0, 7.0}});
  REQUIRE(pi.size() == 1);
  CHECK(pi(0) == doctest::Approx(3.0));
  CHECK(project_negative(cert, I2, cert.neg_basis.col(0))(0) == doctest::Approx(1.0));
  CHECK(std::abs(project_negative(cert, I2, Vec{{0.0, 5.0}})(0)) < 1e-15);
  check_throws_code([&] { quadratic_form(cert, I2, Vec::Zero(3)); }, ErrorCode::DimensionMismatch);
}

TEST_CASE("project_negative without negative space") {
  const MassMatrix I2 = MassMatrix::identity(2);
  const auto cert = QuadraticCertificate::from_operator(Mat::Identity(2, 2), I2, 0.0, 0.1, 1.0);
  check_throws_code([&] { project_negative(cert, I2, Vec::Ones(2)); }, ErrorCode::NoNegativeSpace);
}

TEST_CASE("quadratic form equals its eigen-coordinate expansion; projection is linear") {
  std::mt19937_64 rng(23);
  const Eigen::Index n = 9;
  const MassMatrix M(random_spd(n, rng));
  Mat F = random_spd(n, rng);
  F -= 14.0 * Mat::Identity(n, n);
  const auto cert = QuadraticCertificate::from_form(F, M, 1.0, 0.1, 1.0);
  CHECK(cert.inertia.total() == n);
  CHECK(cert.j() >= 1);
  const auto ed = eigen_of_form(F, M);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 20; ++trial) {
    Vec u(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i) = d(rng);
      v(i) = d(rng);
    }
    const Vec c = ed.vectors.transpose() * M.matrix() * u;
    const double expanded = (ed.values.array() * c.array().square()).sum();
    const double direct = quadratic_form(cert, M, u);
    CHECK(std::abs(direct - expanded) <= 1e-8 * (std::abs(direct) + 1.0));
    const double a = 1.7, b = -0.3;
    const Vec lhs = project_negative(cert, M, a * u + b * v);
    const Vec rhs = a * project_negative(cert, M, u) + b * project_negative(cert, M, v);
    CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
  }
  // neg_basis is M-orthonormal and lies in the negative cone
  const Mat gram = cert.neg_basis.transpose() * M.matrix() * cert.neg_basis;
  CHECK((gram - Mat::Identity(cert.j(), cert.j())).norm() < 1e-10);
  for (int i = 0; i < cert.j(); ++i) CHECK(quadratic_form(cert, M, cert.neg_basis.col(i)) < 0.0);
}

TEST_CASE("orientation convention makes the largest entry positive") {
  Vec v{{0.1, -0.9, 0.3}};
  orient_column(v);
  CHECK(v(1) == doctest::Approx(0.9));
  const auto cert = QuadraticCertificate::from_operator(Mat{{1.0, 0.0}, {0.0, -1.0}}, MassMatrix::identity(2), 0.0,
                                                        0.1, 1.0);
  CHECK(cert.neg_basis(1, 0) == doctest::Approx(1.0));
  const auto neg = cert.negated(MassMatrix::identity(2));
  CHECK(neg.P.isApprox(-cert.P));
  CHECK(neg.inertia == Inertia{1, 0, 1});
}
