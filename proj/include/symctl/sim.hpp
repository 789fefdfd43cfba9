#pragma once

// Closed-loop assembly and integration: flattened coupled state, fixed-step
// RK4, trajectory recording, energy/bound diagnostics, and the
// non-implementable oracle form of the fixed-gain law for equivalence tests.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "symctl/control.hpp"
#include "symctl/linalg.hpp"
#include "symctl/plant.hpp"

namespace symctl {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteStateError : public SimError {
 public:
  using SimError::SimError;
};

class GridMismatchError : public SimError {
 public:
  using SimError::SimError;
};

class InvalidDError : public SimError {
 public:
  using SimError::SimError;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed flat layout of the coupled state:
/// [x(n), x_n(n), r_f(p), q(n), qg(m), W_hat((s+m)*m row-major), Lambda_hat(m*m)].
struct StateLayout {
  std::size_t n = 0;  // plant states
  std::size_t m = 0;  // inputs
  std::size_t p = 0;  // reference channels
  std::size_t s = 0;  // regressor basis dimension

  std::size_t x_off() const { return 0; }
  std::size_t xn_off() const { return n; }
  std::size_t rf_off() const { return 2 * n; }
  std::size_t q_off() const { return 2 * n + p; }
  std::size_t qg_off() const { return 3 * n + p; }
  std::size_t w_off() const { return 3 * n + p + m; }
  std::size_t l_off() const { return w_off() + (s + m) * m; }
  std::size_t size() const { return l_off() + m * m; }
};

struct SimState {
  Vector x;
  Vector x_n;
  Vector r_f;
  Vector q;
  Vector qg;
  Matrix W_hat;       // (s+m) x m
  Matrix Lambda_hat;  // m x m

  static SimState zero(const StateLayout& lay);
};

Vector flatten(const StateLayout& lay, const SimState& s);
SimState unflatten(const StateLayout& lay, const Vector& flat);

struct SimConfig {
  double dt = 1e-3;
  double t_final = 100.0;
  std::size_t record_stride = 10;
  ControllerVariant variant = ControllerVariant::NominalOnly;
  PlantSpec plant;
  Gains gains;
  SymbioticParams params;
  RegressorBasis basis;
  ReferenceSignal reference;
  DomainGrid domain;  // used for the RBF ideal-weight diagnostic
};

/// Quantities derived once per simulation. W_truth is the stacked ideal
/// weight [W_delta; (I - Lambda^{-1})^T] when available (exact for matching
/// polynomial bases, least-squares for RBF bases); diagnostics only.
struct SimContext {
  StateLayout layout;
  Matrix A_n;
  Matrix B_n;
  Matrix B_i;
  Matrix P;
  std::optional<Matrix> W_truth;
  double eps_bar = 0.0;
};

/// Full config validation (dimensions, Hurwitz gains, variant/parameter
/// consistency, stiffness guard) plus derived-quantity setup. Throws
/// ValidationError naming the violated invariant.
SimContext validate_and_prepare(const SimConfig& cfg);

/// Controller-visible signals at one (t, state) point plus the diagnostic
/// total uncertainty, recorded along trajectories.
struct Signals {
  Vector u;
  Vector u_n;
  Vector u_f;
  Vector u_a;
  Vector u_g;
  Vector e;
  Vector pi;  // simulation truth, never fed back
  double z = 0.0;            // e^T P e
  double kappa_value = 0.0;  // kappa(z)
  double kappa_prime = 1.0;  // kappa'(z)
  double V = 0.0;            // energy function, symbiotic variants with truth only
};

/// Derivative of the flattened state. Samples the raw square wave at t;
/// simulate() itself holds the sample constant across the stages of a step
/// so that reference flips stay aligned with the step grid.
Vector rhs(const SimConfig& cfg, const SimContext& ctx, double t, const Vector& flat);

/// Classical 4-stage Runge-Kutta step.
Vector rk4_step(const std::function<Vector(double, const Vector&)>& f, double t, const Vector& s,
                double dt);

struct Trajectory {
  std::vector<double> times;
  std::vector<SimState> states;
  std::vector<Signals> signals;
  std::optional<double> diverged_at;  // set when the state norm exceeded 1e6
};

Trajectory simulate(const SimConfig& cfg);

/// u_f_dot = -alpha Lambda (u_f + u_a + pi(x, u_n)) + u_g. Test-only oracle:
/// needs the true effectiveness and uncertainty.
Vector oracle_uf_dot(const PlantSpec& truth, double alpha, const Vector& u_f, const Vector& u_a,
                     const Vector& u_n, const Vector& x, const Vector& u_g);

struct OracleComparison {
  double max_abs_deviation = 0.0;  // max over recorded times of |u_f - u_f_oracle|_inf
  Trajectory trajectory;
};

/// Integrates the implementable fixed-gain signal (through the q/qg
/// bookkeeping) and the oracle form side by side on the same stage values.
OracleComparison compare_uf_with_oracle(const SimConfig& cfg);

/// Energy function: beta1 kappa(e^T P e) + beta2 u_f^T u_f
/// + ||W_tilde Lambda^{1/2}||_F^2 + beta1/gamma1 ||Lambda_tilde||_F^2.
double energy_V(const SymbioticParams& params, const Matrix& P, const Vector& e, const Vector& u_f,
                const Matrix& W_tilde, const Matrix& Lambda_tilde, const Vector& lambda_true);

struct DChoices {
  double d1, d2, d3, d4;
};

struct BoundConstants {
  DChoices d;
  double l1, l2, l3, l4, l5;
  double V_star;
  double kappa_min_slope;  // rho for built composites
  double kappa_max_slope;  // grid-scanned maximum of kappa'
  double eps_bar;
};

/// Ultimate-bound constants for the nonparametric symbiotic loop. Default d
/// choices are (lambda_min(R)/2, 1, 1, 1); out-of-interval choices throw
/// InvalidDError. Requires a composite with positive minimum slope.
BoundConstants bound_constants(const SymbioticParams& params, const Matrix& P, const Matrix& R,
                               const Matrix& B, const Vector& lambda_true, const Matrix& W_true,
                               double eps_bar, const std::optional<DChoices>& d_choices = std::nullopt);

struct RunMetrics {
  double ise = 0.0;
  double sup_err = 0.0;
  double control_effort = 0.0;
};

/// Trapezoidal ISE / sup error of tr.x against nominal.x plus control effort
/// of tr, on identical time grids (GridMismatchError otherwise).
RunMetrics metrics(const Trajectory& tr, const Trajectory& nominal);

}  // namespace symctl
