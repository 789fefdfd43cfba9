#pragma once

// Control laws and parameter-adjustment right-hand sides for every
// controller variant: nominal feedback, alpha-scaled integral fixed-gain
// law, gating signal, adaptive signal, and the weight/effectiveness
// adjustment mechanisms (with and without leakage, standard and symbiotic).

#include <stdexcept>
#include <string>

#include "symctl/composite.hpp"
#include "symctl/linalg.hpp"

namespace symctl {

enum class ControllerVariant {
  NominalOnly,
  FixedGainOnly,
  StandardAdaptive,
  StandardAdaptiveLeakage,
  SymbioticParametric,
  SymbioticNonparametric,
};

const char* to_string(ControllerVariant v);
ControllerVariant parse_variant(const std::string& name);  // throws std::invalid_argument

bool variant_has_fixed_gain(ControllerVariant v);
bool variant_has_adaptation(ControllerVariant v);
bool variant_is_symbiotic(ControllerVariant v);

struct Gains {
  Matrix K1;  // m x n feedback
  Matrix K2;  // m x p feedforward
};

struct SymbioticParams {
  double alpha = 0.0;   // fixed-gain control parameter
  double beta1 = 0.0;   // adaptive learning parameter
  double beta2 = 0.0;   // second adaptive parameter (leakage in the standard-leakage law)
  double beta3 = 0.0;   // weight leakage, nonparametric symbiotic only
  double gamma1 = 0.0;  // effectiveness adaptation gain
  double gamma2 = 0.0;  // effectiveness leakage, nonparametric symbiotic only
  Matrix R;             // positive definite; defaults to identity at config build
  CompositeFn kappa;    // composite gain function (identity by default)
};

struct AdaptiveState {
  Matrix W_hat;       // (s+m) x m weight estimate
  Matrix Lambda_hat;  // m x m effectiveness estimate
  Vector q;           // running integral of A_n x + B_n r
  Vector qg;          // running integral of u_g
};

/// u_n = -K1 x + K2 r.
Vector nominal_control(const Gains& g, const Vector& x, const Vector& r);

/// u_f = -alpha B_i (x - x0) + alpha B_i q + qg. Zero at t=0 when the
/// integrals are zero and x = x0.
Vector fixed_gain_control(double alpha, const Matrix& B_i, const Vector& x, const Vector& x0,
                          const AdaptiveState& st);

/// u_g = -(beta1/beta2) kappa'(e^T P e) Lambda_hat B^T P e. kappa_prime is
/// the shared per-step evaluation of kappa' at e^T P e.
Vector gating_signal(const SymbioticParams& p, const Matrix& P, const Vector& e,
                     const Matrix& Lambda_hat, const Matrix& B, double kappa_prime);

/// u_a = -W_hat^T sigma.
Vector adaptive_signal(const Matrix& W_hat, const Vector& sigma);

/// beta sigma e^T P B.
Matrix w_hat_dot_standard(double beta, const Vector& sigma, const Vector& e, const Matrix& P,
                          const Matrix& B);

/// beta1 sigma e^T P B - beta2 W_hat.
Matrix w_hat_dot_standard_leakage(double beta1, double beta2, const Vector& sigma, const Vector& e,
                                  const Matrix& P, const Matrix& B, const Matrix& W_hat);

/// beta1 kappa' sigma e^T P B - beta2 alpha sigma u_f^T.
Matrix w_hat_dot_symbiotic_parametric(const SymbioticParams& p, double kappa_prime, const Vector& sigma,
                                      const Vector& e, const Matrix& P, const Matrix& B,
                                      const Vector& u_f);

/// Parametric law with -beta3 W_hat appended.
Matrix w_hat_dot_symbiotic_nonparametric(const SymbioticParams& p, double kappa_prime,
                                         const Vector& sigma, const Vector& e, const Matrix& P,
                                         const Matrix& B, const Vector& u_f, const Matrix& W_hat);

/// gamma kappa' B^T P e u_f^T.
Matrix lambda_hat_dot_parametric(double gamma, double kappa_prime, const Vector& e, const Matrix& P,
                                 const Matrix& B, const Vector& u_f);

/// gamma1 kappa' B^T P e u_f^T - gamma2 Lambda_hat.
Matrix lambda_hat_dot_leakage(double gamma1, double gamma2, double kappa_prime, const Vector& e,
                              const Matrix& P, const Matrix& B, const Vector& u_f,
                              const Matrix& Lambda_hat);

/// Presence/positivity requirements of the variant's parameters; throws
/// std::invalid_argument naming the offending field.
void validate_variant_params(ControllerVariant v, const SymbioticParams& p);

}  // namespace symctl
