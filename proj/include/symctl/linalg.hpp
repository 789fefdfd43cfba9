#pragma once

// Dense small-matrix numerics: linear solves, definiteness checks, symmetric
// eigen extremes, Lyapunov equation, controllability/Hurwitz validation.
// Everything here targets the n <= 10 regime; no attempt is made at
// large/sparse problems.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symctl {

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class NotSymmetricError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class NotHurwitzError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class RankDeficientError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class DimensionError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

/// Dense real vector. Entries handed in through a constructor must be finite.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim) : d_(dim, 0.0) {}
  Vector(std::initializer_list<double> xs);
  explicit Vector(std::vector<double> xs);

  static Vector zeros(std::size_t dim) { return Vector(dim); }

  std::size_t size() const { return d_.size(); }
  double& operator[](std::size_t i) { return d_[i]; }
  double operator[](std::size_t i) const { return d_[i]; }
  const std::vector<double>& data() const { return d_; }

  double norm2() const;
  double norm_inf() const;
  bool all_finite() const;

  Vector& operator+=(const Vector& o);
  Vector& operator-=(const Vector& o);
  Vector& operator*=(double s);

 private:
  std::vector<double> d_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double s, Vector a);
Vector operator*(Vector a, double s);
Vector operator-(Vector a);
double dot(const Vector& a, const Vector& b);
Vector concat(const Vector& a, const Vector& b);

/// Dense real matrix, row-major. Entries handed in through a constructor
/// must be finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix diag(const Vector& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }
  const std::vector<double>& data() const { return d_; }

  Matrix transpose() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> d_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

/// Rank-1 product a b^T.
Matrix outer(const Vector& a, const Vector& b);

/// Solves A x = b by Gaussian elimination with scaled partial pivoting.
/// Throws SingularMatrixError when the best scaled pivot drops below 1e-12.
Vector solve_linear(const Matrix& A, const Vector& b);

/// Multi-RHS variant: solves A X = B column by column from one factorization.
Matrix solve_linear(const Matrix& A, const Matrix& B);

/// Lower-triangular Cholesky factor of a symmetric matrix, or nullopt when S
/// is not positive definite. Symmetry is required to 1e-10 relative to the
/// largest entry; violations throw NotSymmetricError.
std::optional<Matrix> cholesky_pd(const Matrix& S);

/// (lambda_min, lambda_max) of a symmetric matrix via cyclic Jacobi rotations,
/// iterated until the off-diagonal Frobenius norm is <= 1e-12.
std::pair<double, double> sym_eig_extremes(const Matrix& S);

/// Solves A_n^T P + P A_n + R = 0 by Kronecker vectorization. Requires A_n
/// Hurwitz (NotHurwitzError) and R symmetric positive definite. The returned
/// P is exactly symmetric.
Matrix solve_lyapunov(const Matrix& A_n, const Matrix& R);

/// True iff the Lyapunov equation with R = I yields a positive definite
/// solution. A singular vectorized system counts as "not Hurwitz".
bool is_hurwitz(const Matrix& A);

/// B_i = (B^T B)^{-1} B^T for full-column-rank B; RankDeficientError otherwise.
Matrix left_pseudoinverse(const Matrix& B);

/// Rank of [B, AB, ..., A^{n-1}B] via pivoted elimination, threshold 1e-10.
std::size_t controllability_rank(const Matrix& A, const Matrix& B);

/// Induced 2-norm, sqrt(lambda_max(M^T M)).
double induced_norm2(const Matrix& M);

}  // namespace symctl
