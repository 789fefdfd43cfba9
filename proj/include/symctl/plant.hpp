#pragma once

// Uncertain plant description: state-space matrices with diagonal control
// effectiveness, polynomial matched uncertainty, regressor bases (exact
// monomials or RBF-with-bias), and the filtered square-wave reference.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "symctl/linalg.hpp"

namespace symctl {

class PlantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One monomial: coeff * prod_i x_i^exponents[i].
struct MonomialTerm {
  double coeff = 0.0;
  std::vector<unsigned> exponents;  // one exponent per state component
};

/// Channel-wise polynomial uncertainty delta(x): R^n -> R^m.
class TrueUncertainty {
 public:
  TrueUncertainty() = default;
  TrueUncertainty(std::size_t state_dim, std::vector<std::vector<MonomialTerm>> channels);

  static TrueUncertainty zero(std::size_t state_dim, std::size_t channels);

  std::size_t state_dim() const { return n_; }
  std::size_t channels() const { return terms_.size(); }
  const std::vector<std::vector<MonomialTerm>>& terms() const { return terms_; }

  Vector eval(const Vector& x) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<MonomialTerm>> terms_;
};

/// One scalar-coordinate Gaussian unit, exp(-0.5 ((x[coord]-center)/width)^2).
struct RbfUnit {
  std::size_t coord = 0;  // state coordinate the unit projects onto
  double center = 0.0;
};

class RegressorBasis {
 public:
  enum class Kind { None, PolynomialFeatures, RbfWithBias };

  RegressorBasis() = default;
  static RegressorBasis none();
  static RegressorBasis polynomial(std::size_t state_dim, std::vector<std::vector<unsigned>> monomials);
  static RegressorBasis rbf_with_bias(std::size_t state_dim, std::vector<RbfUnit> units, double width);

  Kind kind() const { return kind_; }
  std::size_t dim() const;  // s (RBF: 1 bias + number of units)
  std::size_t state_dim() const { return n_; }
  const std::vector<std::vector<unsigned>>& monomials() const { return monomials_; }
  const std::vector<RbfUnit>& rbf_units() const { return units_; }
  double width() const { return width_; }

  Vector eval(const Vector& x) const;  // sigma_delta(x)

 private:
  Kind kind_ = Kind::None;
  std::size_t n_ = 0;
  std::vector<std::vector<unsigned>> monomials_;
  std::vector<RbfUnit> units_;
  double width_ = 1.0;
};

Vector eval_delta(const TrueUncertainty& u, const Vector& x);
Vector eval_basis(const RegressorBasis& basis, const Vector& x);

/// sigma(x, u_n) = [sigma_delta(x); u_n].
Vector full_regressor(const RegressorBasis& basis, const Vector& x, const Vector& u_n);

struct PlantSpec {
  Matrix A;            // n x n
  Matrix B;            // n x m, full column rank
  Vector lambda_diag;  // m positive entries of the control-effectiveness matrix
  TrueUncertainty delta;
  Vector x0;

  std::size_t n() const { return A.rows(); }
  std::size_t m() const { return B.cols(); }
  Matrix lambda_matrix() const { return Matrix::diag(lambda_diag); }

  /// Controllability, full column rank of B, positive lambda entries,
  /// dimension consistency. Throws PlantError naming the violation.
  void validate() const;
};

/// pi(x, u_n) = delta(x) + (I - Lambda^{-1}) u_n. Simulation-truth quantity,
/// used by oracles and diagnostics only.
Vector total_uncertainty(const PlantSpec& spec, const Vector& x, const Vector& u_n);

struct DomainGrid {
  Vector lo;
  Vector hi;
  std::size_t points_per_axis = 41;
};

struct IdealFit {
  Matrix W_delta;  // s x m least-squares weight
  double eps_bar;  // max residual norm over the grid
};

/// Least-squares fit of delta over a uniform grid on the domain box; eps_bar
/// is the worst-case grid residual. Diagnostic only, never used for control.
IdealFit ideal_weight_and_eps(const PlantSpec& spec, const RegressorBasis& basis, const DomainGrid& grid);

/// Exact weight for polynomial bases when every uncertainty monomial appears
/// in the basis; nullopt otherwise.
std::optional<Matrix> exact_polynomial_weight(const TrueUncertainty& delta, const RegressorBasis& basis);

struct ReferenceSignal {
  double amplitude = 1.0;
  double period = 40.0;              // seconds
  double filter_time_constant = 1.0;  // seconds, first-order lag
};

/// Raw square wave: +amplitude on the first half of each period (50% duty,
/// starting positive). The first-order filter state lives in SimState.
double reference_square(const ReferenceSignal& sig, double t);

}  // namespace symctl
