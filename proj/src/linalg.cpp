#include "symctl/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace symctl {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kRankTol = 1e-10;
constexpr double kSymTol = 1e-10;

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

void require_finite(const std::vector<double>& xs, const char* what) {
  for (double v : xs) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

Vector::Vector(std::initializer_list<double> xs) : d_(xs) {
  require_finite(d_, "Vector");
}

Vector::Vector(std::vector<double> xs) : d_(std::move(xs)) {
  require_finite(d_, "Vector");
}

double Vector::norm2() const {
  double s = 0.0;
  for (double v : d_) s += v * v;
  return std::sqrt(s);
}

double Vector::norm_inf() const {
  double s = 0.0;
  for (double v : d_) s = std::max(s, std::abs(v));
  return s;
}

bool Vector::all_finite() const {
  return std::all_of(d_.begin(), d_.end(), [](double v) { return std::isfinite(v); });
}

Vector& Vector::operator+=(const Vector& o) {
  require(size() == o.size(), "vector +: size mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& o) {
  require(size() == o.size(), "vector -: size mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : d_) v *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector a) { return a *= s; }
Vector operator*(Vector a, double s) { return a *= s; }
Vector operator-(Vector a) { return a *= -1.0; }

double dot(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
  return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), d_(std::move(row_major)) {
  require(d_.size() == rows_ * cols_, "Matrix: data length != rows*cols");
  require_finite(d_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  d_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Matrix: ragged initializer");
    d_.insert(d_.end(), r.begin(), r.end());
  }
  require_finite(d_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : d_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double s = 0.0;
  for (double v : d_) s = std::max(s, std::abs(v));
  return s;
}

bool Matrix::all_finite() const {
  return std::all_of(d_.begin(), d_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, "matrix +: shape mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, "matrix -: shape mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : d_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matrix *: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  require(a.cols() == x.size(), "matrix*vector: shape mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix outer(const Vector& a, const Vector& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

namespace {

// LU factorization with scaled partial pivoting; returns the permuted, packed
// factors. Throws SingularMatrixError when the best scaled pivot is < 1e-12.
struct Lu {
  Matrix lu;
  std::vector<std::size_t> perm;
};

Lu factorize(const Matrix& A) {
  require(A.rows() == A.cols(), "solve_linear: A must be square");
  const std::size_t n = A.rows();
  Lu f{A, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s = std::max(s, std::abs(f.lu(i, j)));
    if (s == 0.0) throw SingularMatrixError("solve_linear: zero row");
    scale[i] = s;
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(f.lu(k, k)) / scale[k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double cand = std::abs(f.lu(i, k)) / scale[i];
      if (cand > best) {
        best = cand;
        piv = i;
      }
    }
    if (best < kPivotTol) throw SingularMatrixError("solve_linear: pivot below 1e-12 after scaling");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      std::swap(scale[k], scale[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = f.lu(i, k) / f.lu(k, k);
      f.lu(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

Vector lu_solve(const Lu& f, const Vector& b) {
  const std::size_t n = f.perm.size();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
    y[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * y[j];
    y[ii] = s / f.lu(ii, ii);
  }
  return y;
}

void check_symmetric(const Matrix& S, const char* who) {
  require(S.rows() == S.cols(), "symmetric op: matrix must be square");
  const double tol = kSymTol * std::max(1.0, S.max_abs());
  for (std::size_t i = 0; i < S.rows(); ++i)
    for (std::size_t j = i + 1; j < S.cols(); ++j)
      if (std::abs(S(i, j) - S(j, i)) > tol)
        throw NotSymmetricError(std::string(who) + ": matrix is not symmetric");
}

// Solves A^T P + P A + R = 0 through the n^2 x n^2 Kronecker system; nullopt
// when that system is singular. No Hurwitz or definiteness checks here.
std::optional<Matrix> lyapunov_raw(const Matrix& A, const Matrix& R) {
  const std::size_t n = A.rows();
  const Matrix At = A.transpose();
  Matrix K(n * n, n * n);
  Vector rhs(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i * n + j;
      rhs[row] = -R(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        K(row, k * n + j) += At(i, k);
        K(row, i * n + k) += At(j, k);
      }
    }
  Vector p;
  try {
    p = solve_linear(K, rhs);
  } catch (const SingularMatrixError&) {
    return std::nullopt;
  }
  Matrix P(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) P(i, j) = p[i * n + j];
  // force exact symmetry
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (P(i, j) + P(j, i));
      P(i, j) = v;
      P(j, i) = v;
    }
  if (!P.all_finite()) return std::nullopt;
  return P;
}

}  // namespace

Vector solve_linear(const Matrix& A, const Vector& b) {
  require(A.rows() == b.size(), "solve_linear: b size mismatch");
  return lu_solve(factorize(A), b);
}

Matrix solve_linear(const Matrix& A, const Matrix& B) {
  require(A.rows() == B.rows(), "solve_linear: B shape mismatch");
  const Lu f = factorize(A);
  Matrix X(A.cols(), B.cols());
  for (std::size_t j = 0; j < B.cols(); ++j) {
    Vector b(B.rows());
    for (std::size_t i = 0; i < B.rows(); ++i) b[i] = B(i, j);
    const Vector x = lu_solve(f, b);
    for (std::size_t i = 0; i < X.rows(); ++i) X(i, j) = x[i];
  }
  return X;
}

std::optional<Matrix> cholesky_pd(const Matrix& S) {
  check_symmetric(S, "cholesky_pd");
  const std::size_t n = S.rows();
  // relative pivot floor: exactly singular matrices land at +-eps after
  // cancellation and must not pass as definite
  const double floor = kPivotTol * std::max(1.0, S.max_abs());
  Matrix L(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = S(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > floor)) return std::nullopt;
    L(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = S(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

std::pair<double, double> sym_eig_extremes(const Matrix& S) {
  check_symmetric(S, "sym_eig_extremes");
  const std::size_t n = S.rows();
  Matrix A = S;
  // exact symmetrization keeps the sweeps self-consistent
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (A(i, j) + A(j, i));
      A(i, j) = v;
      A(j, i) = v;
    }

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
  };

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-12; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  if (off_norm() > 1e-12) throw LinalgError("sym_eig_extremes: Jacobi sweeps did not converge");

  double lo = A(0, 0), hi = A(0, 0);
  for (std::size_t i = 1; i < n; ++i) {
    lo = std::min(lo, A(i, i));
    hi = std::max(hi, A(i, i));
  }
  return {lo, hi};
}

Matrix solve_lyapunov(const Matrix& A_n, const Matrix& R) {
  require(A_n.rows() == A_n.cols(), "solve_lyapunov: A_n must be square");
  require(R.rows() == A_n.rows() && R.cols() == A_n.cols(), "solve_lyapunov: R shape mismatch");
  check_symmetric(R, "solve_lyapunov");
  if (!cholesky_pd(R).has_value())
    throw LinalgError("solve_lyapunov: R is not positive definite");
  if (!is_hurwitz(A_n)) throw NotHurwitzError("solve_lyapunov: A_n is not Hurwitz");
  auto P = lyapunov_raw(A_n, R);
  if (!P.has_value()) throw SingularMatrixError("solve_lyapunov: vectorized system is singular");
  return *P;
}

bool is_hurwitz(const Matrix& A) {
  require(A.rows() == A.cols(), "is_hurwitz: A must be square");
  const auto P = lyapunov_raw(A, Matrix::identity(A.rows()));
  if (!P.has_value()) return false;
  try {
    return cholesky_pd(*P).has_value();
  } catch (const NotSymmetricError&) {
    return false;
  }
}

Matrix left_pseudoinverse(const Matrix& B) {
  const Matrix G = B.transpose() * B;
  const auto L = cholesky_pd(G);
  if (!L.has_value()) throw RankDeficientError("left_pseudoinverse: B^T B is not positive definite");
  // Solve G X = B^T using the factor: L L^T X = B^T.
  const std::size_t m = G.rows(), n = B.rows();
  Matrix X(m, n);
  for (std::size_t col = 0; col < n; ++col) {
    Vector y(m);
    for (std::size_t i = 0; i < m; ++i) {
      double s = B(col, i);  // (B^T)(i, col)
      for (std::size_t k = 0; k < i; ++k) s -= (*L)(i, k) * y[k];
      y[i] = s / (*L)(i, i);
    }
    for (std::size_t ii = m; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < m; ++k) s -= (*L)(k, ii) * y[k];
      y[ii] = s / (*L)(ii, ii);
    }
    for (std::size_t i = 0; i < m; ++i) X(i, col) = y[i];
  }
  return X;
}

std::size_t controllability_rank(const Matrix& A, const Matrix& B) {
  require(A.rows() == A.cols(), "controllability_rank: A must be square");
  require(A.rows() == B.rows(), "controllability_rank: B row mismatch");
  const std::size_t n = A.rows(), m = B.cols();
  Matrix C(n, n * m);
  Matrix block = B;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) C(i, k * m + j) = block(i, j);
    block = A * block;
  }

  const double tol = kRankTol * std::max(1.0, C.max_abs());
  std::size_t rank = 0;
  for (std::size_t col = 0; col < C.cols() && rank < n; ++col) {
    std::size_t piv = rank;
    for (std::size_t i = rank + 1; i < n; ++i)
      if (std::abs(C(i, col)) > std::abs(C(piv, col))) piv = i;
    if (std::abs(C(piv, col)) <= tol) continue;
    if (piv != rank)
      for (std::size_t j = 0; j < C.cols(); ++j) std::swap(C(rank, j), C(piv, j));
    for (std::size_t i = rank + 1; i < n; ++i) {
      const double f = C(i, col) / C(rank, col);
      for (std::size_t j = col; j < C.cols(); ++j) C(i, j) -= f * C(rank, j);
    }
    ++rank;
  }
  return rank;
}

double induced_norm2(const Matrix& M) {
  const auto [lo, hi] = sym_eig_extremes(M.transpose() * M);
  (void)lo;
  return std::sqrt(std::max(0.0, hi));
}

}  // namespace symctl
