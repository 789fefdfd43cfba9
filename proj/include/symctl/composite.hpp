#pragma once

// Twice-continuously-differentiable composite gain function: slope rho near
// zero, identity far from zero, quintic transition in between. The transition
// coefficients come from a 6x6 linear system built from the C^2 matching
// conditions at both ends of (a, b).

#include <array>
#include <stdexcept>

namespace symctl {

class CompositeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidIntervalError : public CompositeError {
 public:
  using CompositeError::CompositeError;
};

class InvalidRhoError : public CompositeError {
 public:
  using CompositeError::CompositeError;
};

class NonMonotoneError : public CompositeError {
 public:
  using CompositeError::CompositeError;
};

class NegativeArgumentError : public CompositeError {
 public:
  using CompositeError::CompositeError;
};

struct KappaValue {
  double value;
  double prime;
  double double_prime;
};

class CompositeFn {
 public:
  /// Default-constructed composites are the identity map.
  CompositeFn() = default;

  /// Builds the piecewise function for 0 < a < b, 0 <= rho < 1: solves the
  /// quintic transition coefficients and validates the result on a grid
  /// (slope positivity, nonnegativity, boundary conditions) before returning.
  static CompositeFn build(double a, double b, double rho);

  /// kappa(z) = z everywhere; slope identically 1.
  static CompositeFn identity();

  /// Construction from explicit transition coefficients. Runs the same grid
  /// validation as build(); mainly useful for loading stored functions and
  /// for exercising the validation itself.
  static CompositeFn with_coefficients(double a, double b, double rho,
                                       const std::array<double, 6>& psi);

  /// Piecewise evaluation of (kappa, kappa', kappa'') at z >= 0.
  KappaValue eval(double z) const;

  bool is_identity() const { return identity_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double rho() const { return rho_; }
  const std::array<double, 6>& psi() const { return psi_; }

  /// Extremes of kappa' over the validation grid (min equals rho for built
  /// functions; identity reports 1 for both).
  double min_slope() const { return min_slope_; }
  double max_slope() const { return max_slope_; }

 private:
  double a_ = 0.0;
  double b_ = 0.0;
  double rho_ = 0.0;
  std::array<double, 6> psi_{};
  bool identity_ = true;
  double min_slope_ = 1.0;
  double max_slope_ = 1.0;
};

CompositeFn build_composite(double a, double b, double rho);
KappaValue kappa_eval(const CompositeFn& f, double z);

}  // namespace symctl
