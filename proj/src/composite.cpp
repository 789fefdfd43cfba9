#include "symctl/composite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "symctl/linalg.hpp"

namespace symctl {

namespace {

constexpr std::size_t kGridPoints = 1000;

KappaValue eval_transition(const std::array<double, 6>& psi, double z) {
  double v = psi[5];
  for (int k = 4; k >= 0; --k) v = v * z + psi[k];
  double d = 5.0 * psi[5];
  for (int k = 4; k >= 1; --k) d = d * z + k * psi[k];
  double dd = 20.0 * psi[5];
  for (int k = 4; k >= 2; --k) dd = dd * z + k * (k - 1) * psi[k];
  return {v, d, dd};
}

}  // namespace

CompositeFn CompositeFn::identity() { return CompositeFn{}; }

CompositeFn CompositeFn::with_coefficients(double a, double b, double rho,
                                           const std::array<double, 6>& psi) {
  if (!(a > 0.0) || !(b > a)) throw InvalidIntervalError("composite: need 0 < a < b");
  if (!(rho >= 0.0) || !(rho < 1.0)) throw InvalidRhoError("composite: need 0 <= rho < 1");

  CompositeFn f;
  f.a_ = a;
  f.b_ = b;
  f.rho_ = rho;
  f.psi_ = psi;
  f.identity_ = false;

  // Grid validation over [0, 2b]: slope positivity (strict for rho > 0) and
  // nonnegativity of the function itself.
  double min_slope = rho;
  double max_slope = 1.0;
  const double slope_floor = rho > 0.0 ? 0.0 : -1e-12;
  for (std::size_t i = 0; i <= kGridPoints; ++i) {
    const double z = 2.0 * b * static_cast<double>(i) / static_cast<double>(kGridPoints);
    const KappaValue kv = f.eval(z);
    if (!(kv.prime > slope_floor))
      throw NonMonotoneError("composite: kappa' is not positive on the validation grid");
    if (kv.value < -1e-12)
      throw NonMonotoneError("composite: kappa is negative on the validation grid");
    min_slope = std::min(min_slope, kv.prime);
    max_slope = std::max(max_slope, kv.prime);
  }
  f.min_slope_ = min_slope;
  f.max_slope_ = max_slope;

  // Boundary conditions at a and b must match the outer branches.
  const double tol = 1e-9 * std::max(1.0, b);
  const KappaValue at_a = eval_transition(psi, a);
  const KappaValue at_b = eval_transition(psi, b);
  const double residuals[6] = {at_a.value - rho * a, at_a.prime - rho, at_a.double_prime,
                               at_b.value - b,       at_b.prime - 1.0, at_b.double_prime};
  for (double r : residuals) {
    if (std::abs(r) > tol)
      throw CompositeError("composite: transition coefficients violate a boundary condition");
  }
  return f;
}

CompositeFn CompositeFn::build(double a, double b, double rho) {
  if (!(a > 0.0) || !(b > a)) throw InvalidIntervalError("build_composite: need 0 < a < b");
  if (!(rho >= 0.0) || !(rho < 1.0)) throw InvalidRhoError("build_composite: need 0 <= rho < 1");

  // C^2 matching conditions on the quintic at both interval ends.
  const Matrix M{{1, a, a * a, a * a * a, a * a * a * a, a * a * a * a * a},
                 {0, 1, 2 * a, 3 * a * a, 4 * a * a * a, 5 * a * a * a * a},
                 {0, 0, 2, 6 * a, 12 * a * a, 20 * a * a * a},
                 {1, b, b * b, b * b * b, b * b * b * b, b * b * b * b * b},
                 {0, 1, 2 * b, 3 * b * b, 4 * b * b * b, 5 * b * b * b * b},
                 {0, 0, 2, 6 * b, 12 * b * b, 20 * b * b * b}};
  const Vector rhs{rho * a, rho, 0.0, b, 1.0, 0.0};
  const Vector psi_v = solve_linear(M, rhs);

  std::array<double, 6> psi{};
  for (std::size_t i = 0; i < 6; ++i) psi[i] = psi_v[i];
  return with_coefficients(a, b, rho, psi);
}

KappaValue CompositeFn::eval(double z) const {
  if (z < 0.0) throw NegativeArgumentError("kappa_eval: z must be >= 0");
  if (identity_) return {z, 1.0, 0.0};
  if (z <= a_) return {rho_ * z, rho_, 0.0};
  if (z >= b_) return {z, 1.0, 0.0};
  return eval_transition(psi_, z);
}

CompositeFn build_composite(double a, double b, double rho) { return CompositeFn::build(a, b, rho); }

KappaValue kappa_eval(const CompositeFn& f, double z) { return f.eval(z); }

}  // namespace symctl
