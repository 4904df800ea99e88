#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "esc/linalg.hpp"

using namespace esc;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

Matrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = g(rng);
  return m;
}

Matrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST(Matrix, ArithmeticAndTranspose) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(a + b, (Matrix{{1, 3}, {4, 4}}));
  EXPECT_EQ(a.transpose(), (Matrix{{1, 3}, {2, 4}}));
  EXPECT_EQ((a * Vector{1, 1}), (Vector{3, 7}));
  EXPECT_EQ(Matrix::identity(2) * 3.0, Matrix::diagonal(Vector{3, 3}));
}

TEST(Matrix, HelpersOnKnownValues) {
  EXPECT_DOUBLE_EQ(norm2(Vector{3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(quadratic_form(Vector{1, -1}, Matrix{{100, 30}, {30, 20}}, Vector{1, -1}), 60.0);
  EXPECT_TRUE(is_diagonal(Matrix::diagonal(Vector{1, 2, 3})));
  EXPECT_FALSE(is_diagonal(Matrix{{1, 1e-3}, {0, 1}}));
  EXPECT_GT(asymmetry(Matrix{{1, 1}, {0, 1}}), 0.1);
  EXPECT_EQ(symmetric_part(Matrix{{1, 2}, {0, 1}}), (Matrix{{1, 1}, {1, 1}}));
}

TEST(JacobiEigen, KnownSpectrum) {
  const auto e = jacobi_eigen(Matrix{{100, 30}, {30, 20}});
  EXPECT_NEAR(e.values[0], 10.0, 1e-12);
  EXPECT_NEAR(e.values[1], 110.0, 1e-12);
}

TEST(JacobiEigen, RejectsAsymmetricInput) {
  EXPECT_THROW(jacobi_eigen(Matrix{{1, 1}, {0, 1}}), NotSymmetricError);
}

TEST(JacobiEigen, MatchesEigenOnRandomSymmetric) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 16u}) {
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix m = random_symmetric(n, rng);
      const auto mine = jacobi_eigen(m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(m));
      for (std::size_t i = 0; i < n; ++i)
        EXPECT_NEAR(mine.values[i], ref.eigenvalues()(static_cast<Eigen::Index>(i)), 1e-10 * (1.0 + max_abs(m)));
      // reconstruction V diag V^T
      Matrix rec(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k) rec(i, j) += mine.vectors(i, k) * mine.values[k] * mine.vectors(j, k);
      EXPECT_LT(max_abs(rec - m), 1e-10 * (1.0 + frobenius_norm(m)));
    }
  }
}

TEST(SpectralNorm, MatchesSingularValue) {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 4u, 7u}) {
    const Matrix a = random_matrix(n, rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    EXPECT_NEAR(spectral_norm(a), svd.singularValues()(0), 1e-10 * svd.singularValues()(0));
  }
}

TEST(Solve, MatchesEigenAndDetectsSingular) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(6, rng) + Matrix::identity(6) * 4.0;
  const Matrix b = random_matrix(6, rng);
  const Matrix x = solve(a, b);
  const Eigen::MatrixXd ref = to_eigen(a).partialPivLu().solve(to_eigen(b));
  EXPECT_LT((to_eigen(x) - ref).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(solve(Matrix{{1, 2}, {2, 4}}, Matrix::identity(2)), SingularMatrixError);
}

TEST(Expm, MatchesEigenMatrixExponential) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 2u, 3u, 6u}) {
    for (double scale : {1e-3, 0.5, 3.0, 20.0}) {
      const Matrix a = random_matrix(n, rng) * scale;
      const Eigen::MatrixXd ref = to_eigen(a).exp();
      const Eigen::MatrixXd mine = to_eigen(expm(a));
      EXPECT_LT((mine - ref).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + ref.cwiseAbs().maxCoeff())) << n << " " << scale;
    }
  }
}

TEST(Expm, DiagonalClosedForm) {
  const Matrix e = expm(Matrix::diagonal(Vector{-1.0, 0.0, 2.0}));
  EXPECT_NEAR(e(0, 0), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(e(2, 2), std::exp(2.0), 1e-13);
  EXPECT_EQ(e(0, 1), 0.0);
}
