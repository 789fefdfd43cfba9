#pragma once

// Test-side oracles and generators, kept independent of the library's solve
// paths: plain Gauss-Jordan elimination, seeded random matrices, and the
// shared property suites that both the unit tests and the acceptance binary
// run over random instances.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "symctl/linalg.hpp"

namespace symctl::testing {

// Gauss-Jordan with plain (unscaled) partial pivoting; deliberately a
// different code path from the library solver.
inline std::vector<double> gauss_jordan(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    const double d = a[k][k];
    for (std::size_t j = 0; j < n; ++j) a[k][j] /= d;
    b[k] /= d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a[i][k];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  return b;
}

inline Matrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline Vector random_vector(std::mt19937& rng, std::size_t dim, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = dist(rng);
  return v;
}

// Random diagonally shifted matrix: well conditioned by construction.
inline Matrix random_shifted(std::mt19937& rng, std::size_t n) {
  Matrix m = random_matrix(rng, n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 0.5 * static_cast<double>(n);
  return m;
}

inline Matrix random_spd(std::mt19937& rng, std::size_t n) {
  const Matrix m = random_matrix(rng, n, n);
  Matrix s = m.transpose() * m;
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.1;
  return s;
}

struct PropertyResult {
  bool ok = true;
  double worst = 0.0;
  std::string detail;

  void fold(double value, double limit, const std::string& what) {
    worst = std::max(worst, value);
    if (value > limit && ok) {
      ok = false;
      std::ostringstream os;
      os << what << ": " << value << " > " << limit;
      detail = os.str();
    }
  }
};

// residual of solve_linear on 100 random shifted systems, n in 2..6
inline PropertyResult solve_residual_property(unsigned seed = 1234) {
  std::mt19937 rng(seed);
  PropertyResult res;
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + static_cast<std::size_t>(it % 5);
    const Matrix A = random_shifted(rng, n);
    const Vector b = random_vector(rng, n);
    const Vector x = solve_linear(A, b);
    const Vector r = A * x - b;
    res.fold(r.norm_inf(), 1e-10 * (1.0 + b.norm_inf()), "solve residual");
  }
  return res;
}

// cholesky reconstruction + PD detection on 100 random SPD matrices
inline PropertyResult cholesky_property(unsigned seed = 2345) {
  std::mt19937 rng(seed);
  PropertyResult res;
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + static_cast<std::size_t>(it % 4);
    const Matrix S = random_spd(rng, n);
    const auto L = cholesky_pd(S);
    if (!L.has_value()) {
      res.ok = false;
      res.detail = "SPD matrix reported as not PD";
      return res;
    }
    const Matrix R = *L * L->transpose() - S;
    res.fold(R.frobenius_norm(), 1e-9 * std::max(1.0, S.frobenius_norm()), "cholesky reconstruction");
  }
  return res;
}

// B_i B = I on 100 random full-column-rank 4x2 matrices
inline PropertyResult pseudoinverse_property(unsigned seed = 3456) {
  std::mt19937 rng(seed);
  PropertyResult res;
  for (int it = 0; it < 100; ++it) {
    Matrix B = random_matrix(rng, 4, 2);
    B(0, 0) += 2.0;  // keep the columns independent
    B(1, 1) += 2.0;
    const Matrix Bi = left_pseudoinverse(B);
    const Matrix E = Bi * B - Matrix::identity(2);
    res.fold(E.max_abs(), 1e-10, "pseudoinverse identity");
  }
  return res;
}

// Rayleigh quotient of 100 random unit vectors within the eigen extremes
inline PropertyResult rayleigh_property(unsigned seed = 4567) {
  std::mt19937 rng(seed);
  PropertyResult res;
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + static_cast<std::size_t>(it % 4);
    Matrix S = random_matrix(rng, n, n);
    S = 0.5 * (S + S.transpose());
    const auto [lo, hi] = sym_eig_extremes(S);
    Vector v = random_vector(rng, n);
    if (v.norm2() < 1e-9) v[0] = 1.0;
    v *= 1.0 / v.norm2();
    const double q = dot(v, S * v);
    res.fold(lo - q, 1e-9, "rayleigh below lambda_min");
    res.fold(q - hi, 1e-9, "rayleigh above lambda_max");
  }
  return res;
}

// Lyapunov residual + definiteness on 100 random stable systems
inline PropertyResult lyapunov_property(unsigned seed = 5678) {
  std::mt19937 rng(seed);
  PropertyResult res;
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + static_cast<std::size_t>(it % 3);
    Matrix A = random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) A(i, i) -= 2.0;  // push spectrum left
    if (!is_hurwitz(A)) continue;
    const Matrix R = random_spd(rng, n);
    const Matrix P = solve_lyapunov(A, R);
    const Matrix res_m = A.transpose() * P + P * A + R;
    res.fold(res_m.frobenius_norm(), 1e-10 * R.frobenius_norm(), "lyapunov residual");
    if (!cholesky_pd(P).has_value()) {
      res.ok = false;
      res.detail = "lyapunov solution not PD";
      return res;
    }
  }
  return res;
}

}  // namespace symctl::testing
