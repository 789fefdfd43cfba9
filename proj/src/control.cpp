#include "symctl/control.hpp"

namespace symctl {

const char* to_string(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::NominalOnly:
      return "nominal";
    case ControllerVariant::FixedGainOnly:
      return "fixed_gain";
    case ControllerVariant::StandardAdaptive:
      return "adaptive";
    case ControllerVariant::StandardAdaptiveLeakage:
      return "adaptive_leakage";
    case ControllerVariant::SymbioticParametric:
      return "symbiotic_parametric";
    case ControllerVariant::SymbioticNonparametric:
      return "symbiotic_nonparametric";
  }
  return "?";
}

ControllerVariant parse_variant(const std::string& name) {
  if (name == "nominal") return ControllerVariant::NominalOnly;
  if (name == "fixed_gain") return ControllerVariant::FixedGainOnly;
  if (name == "adaptive") return ControllerVariant::StandardAdaptive;
  if (name == "adaptive_leakage") return ControllerVariant::StandardAdaptiveLeakage;
  if (name == "symbiotic_parametric") return ControllerVariant::SymbioticParametric;
  if (name == "symbiotic_nonparametric") return ControllerVariant::SymbioticNonparametric;
  throw std::invalid_argument("unknown controller variant: " + name);
}

bool variant_has_fixed_gain(ControllerVariant v) {
  return v == ControllerVariant::FixedGainOnly || variant_is_symbiotic(v);
}

bool variant_has_adaptation(ControllerVariant v) {
  return v == ControllerVariant::StandardAdaptive || v == ControllerVariant::StandardAdaptiveLeakage ||
         variant_is_symbiotic(v);
}

bool variant_is_symbiotic(ControllerVariant v) {
  return v == ControllerVariant::SymbioticParametric || v == ControllerVariant::SymbioticNonparametric;
}

Vector nominal_control(const Gains& g, const Vector& x, const Vector& r) {
  return -(g.K1 * x) + g.K2 * r;
}

Vector fixed_gain_control(double alpha, const Matrix& B_i, const Vector& x, const Vector& x0,
                          const AdaptiveState& st) {
  Vector drift = st.q - (x - x0);
  return alpha * (B_i * drift) + st.qg;
}

namespace {

Vector bt_p_e(const Matrix& B, const Matrix& P, const Vector& e) {
  return B.transpose() * (P * e);
}

}  // namespace

Vector gating_signal(const SymbioticParams& p, const Matrix& P, const Vector& e,
                     const Matrix& Lambda_hat, const Matrix& B, double kappa_prime) {
  return (-p.beta1 / p.beta2 * kappa_prime) * (Lambda_hat * bt_p_e(B, P, e));
}

Vector adaptive_signal(const Matrix& W_hat, const Vector& sigma) {
  return -(W_hat.transpose() * sigma);
}

Matrix w_hat_dot_standard(double beta, const Vector& sigma, const Vector& e, const Matrix& P,
                          const Matrix& B) {
  return beta * outer(sigma, bt_p_e(B, P, e));
}

Matrix w_hat_dot_standard_leakage(double beta1, double beta2, const Vector& sigma, const Vector& e,
                                  const Matrix& P, const Matrix& B, const Matrix& W_hat) {
  return w_hat_dot_standard(beta1, sigma, e, P, B) - beta2 * W_hat;
}

Matrix w_hat_dot_symbiotic_parametric(const SymbioticParams& p, double kappa_prime, const Vector& sigma,
                                      const Vector& e, const Matrix& P, const Matrix& B,
                                      const Vector& u_f) {
  return (p.beta1 * kappa_prime) * outer(sigma, bt_p_e(B, P, e)) -
         (p.beta2 * p.alpha) * outer(sigma, u_f);
}

Matrix w_hat_dot_symbiotic_nonparametric(const SymbioticParams& p, double kappa_prime,
                                         const Vector& sigma, const Vector& e, const Matrix& P,
                                         const Matrix& B, const Vector& u_f, const Matrix& W_hat) {
  return w_hat_dot_symbiotic_parametric(p, kappa_prime, sigma, e, P, B, u_f) - p.beta3 * W_hat;
}

Matrix lambda_hat_dot_parametric(double gamma, double kappa_prime, const Vector& e, const Matrix& P,
                                 const Matrix& B, const Vector& u_f) {
  return (gamma * kappa_prime) * outer(bt_p_e(B, P, e), u_f);
}

Matrix lambda_hat_dot_leakage(double gamma1, double gamma2, double kappa_prime, const Vector& e,
                              const Matrix& P, const Matrix& B, const Vector& u_f,
                              const Matrix& Lambda_hat) {
  return lambda_hat_dot_parametric(gamma1, kappa_prime, e, P, B, u_f) - gamma2 * Lambda_hat;
}

void validate_variant_params(ControllerVariant v, const SymbioticParams& p) {
  auto need_positive = [&](double value, const char* field) {
    if (!(value > 0.0))
      throw std::invalid_argument(std::string("params.") + field + " must be > 0 for variant " +
                                  to_string(v));
  };
  if (variant_has_fixed_gain(v)) need_positive(p.alpha, "alpha");
  if (variant_has_adaptation(v)) need_positive(p.beta1, "beta1");
  if (v == ControllerVariant::StandardAdaptiveLeakage || variant_is_symbiotic(v))
    need_positive(p.beta2, "beta2");
  if (variant_is_symbiotic(v)) need_positive(p.gamma1, "gamma1");
  if (v == ControllerVariant::SymbioticNonparametric) {
    need_positive(p.beta3, "beta3");
    need_positive(p.gamma2, "gamma2");
    if (!p.kappa.is_identity() && p.kappa.rho() == 0.0)
      throw std::invalid_argument(
          "params.kappa.rho must be nonzero for variant symbiotic_nonparametric");
  }
}

}  // namespace symctl
