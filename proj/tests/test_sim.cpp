#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "symctl/sim.hpp"

using namespace symctl;

namespace {

SimConfig parametric_config(ControllerVariant variant, double alpha, bool identity_kappa = false) {
  SimConfig cfg;
  cfg.variant = variant;
  cfg.plant.A = Matrix{{0, 1}, {0, 0}};
  cfg.plant.B = Matrix{{0}, {1}};
  cfg.plant.lambda_diag = Vector{0.9};
  cfg.plant.delta = TrueUncertainty(
      2, {{{0.2, {1, 0}}, {0.2, {0, 1}}, {0.8, {1, 1}}, {0.1, {3, 0}}, {0.1, {0, 2}}}});
  cfg.plant.x0 = Vector(2);
  cfg.gains.K1 = Matrix{{0.16, 0.57}};
  cfg.gains.K2 = Matrix{{0.16}};
  cfg.basis = RegressorBasis::polynomial(2, {{1, 0}, {0, 1}, {1, 1}, {3, 0}, {0, 2}});
  cfg.params.alpha = alpha;
  cfg.params.beta1 = 1.0;
  cfg.params.beta2 = 1.0;
  cfg.params.gamma1 = 1.0;
  cfg.params.kappa = identity_kappa ? CompositeFn::identity() : CompositeFn::build(1.0, 2.0, 0.1);
  return cfg;
}

SimConfig nonparametric_config(ControllerVariant variant, double alpha) {
  SimConfig cfg;
  cfg.variant = variant;
  cfg.plant.A = Matrix{{0, 1}, {0, 0}};
  cfg.plant.B = Matrix{{0}, {1}};
  cfg.plant.lambda_diag = Vector{0.8};
  cfg.plant.delta = TrueUncertainty(
      2, {{{0.4, {1, 0}}, {0.4, {0, 1}}, {1.6, {1, 1}}, {0.2, {3, 0}}, {0.2, {0, 2}}}});
  cfg.plant.x0 = Vector(2);
  cfg.gains.K1 = Matrix{{0.16, 0.57}};
  cfg.gains.K2 = Matrix{{0.16}};
  cfg.basis = RegressorBasis::rbf_with_bias(2, {{0, 1.0}, {0, -1.0}, {1, 1.0}, {1, -1.0}}, 1.0);
  cfg.domain = DomainGrid{Vector{-4, -4}, Vector{4, 4}, 41};
  cfg.params.alpha = alpha;
  cfg.params.beta1 = 1.0;
  cfg.params.beta2 = 1.0;
  cfg.params.beta3 = 2.0;
  cfg.params.gamma1 = 1.0;
  cfg.params.gamma2 = 2.0;
  cfg.params.kappa = CompositeFn::build(1.0, 2.0, 0.1);
  return cfg;
}

}  // namespace

TEST_CASE("rk4 step: zero derivative leaves the state unchanged") {
  auto f = [](double, const Vector& s) { return Vector(s.size()); };
  const Vector s{1.5, -2.25};
  const Vector out = rk4_step(f, 0.0, s, 0.1);
  CHECK(out[0] == s[0]);
  CHECK(out[1] == s[1]);
}

TEST_CASE("rk4 step: scalar exponential decay") {
  auto f = [](double, const Vector& s) { return Vector{-s[0]}; };
  const Vector out = rk4_step(f, 0.0, Vector{1.0}, 0.1);
  CHECK(out[0] == doctest::Approx(0.9048375).epsilon(1e-12));
  CHECK(std::abs(out[0] - std::exp(-0.1)) <= 1e-7);
}

TEST_CASE("rk4 step on a linear system matches the truncated matrix exponential") {
  const Matrix A{{0, 1}, {-2, -0.3}};
  auto f = [&](double, const Vector& s) { return A * s; };
  const double dt = 0.05;
  const Vector s0{0.7, -0.4};
  const Vector stepped = rk4_step(f, 0.0, s0, dt);

  Matrix series = Matrix::identity(2);
  Matrix power = Matrix::identity(2);
  double fact = 1.0;
  for (int k = 1; k <= 4; ++k) {
    power = power * A;
    fact *= k;
    series += (std::pow(dt, k) / fact) * power;
  }
  const Vector expected = series * s0;
  CHECK((stepped - expected).norm_inf() <= 1e-15);
}

TEST_CASE("state layout round-trips") {
  const StateLayout lay{2, 1, 1, 5};
  std::mt19937 rng(5);
  for (int it = 0; it < 20; ++it) {
    const Vector flat = testing::random_vector(rng, lay.size(), -3.0, 3.0);
    const Vector back = flatten(lay, unflatten(lay, flat));
    CHECK((back - flat).norm_inf() == 0.0);
  }
}

TEST_CASE("rhs at t=0 with zero initial conditions") {
  SimConfig cfg = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
  const SimContext ctx = validate_and_prepare(cfg);
  const Vector flat(ctx.layout.size());
  const Vector d = rhs(cfg, ctx, 0.0, flat);
  const SimState ds = unflatten(ctx.layout, d);

  // e = 0, u_f = 0, u_g = 0 at rest; the only motion is the reference filter
  CHECK(ds.W_hat.max_abs() == 0.0);
  CHECK(ds.Lambda_hat.max_abs() == 0.0);
  CHECK(ds.qg.norm_inf() == 0.0);
  CHECK(ds.r_f[0] == doctest::Approx(1.0));  // (r_raw - 0)/tau
}

TEST_CASE("rhs rejects non-finite states") {
  SimConfig cfg = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
  const SimContext ctx = validate_and_prepare(cfg);
  std::vector<double> xs(ctx.layout.size(), 0.0);
  xs[0] = std::numeric_limits<double>::quiet_NaN();
  Vector bad(ctx.layout.size());
  for (std::size_t i = 0; i < xs.size(); ++i) bad[i] = xs[i];
  CHECK_THROWS_AS(rhs(cfg, ctx, 0.0, bad), NonFiniteStateError);
}

TEST_CASE("nominal-only run reproduces the reference model exactly") {
  SimConfig cfg = parametric_config(ControllerVariant::NominalOnly, 0.0);
  cfg.params = SymbioticParams{};
  cfg.basis = RegressorBasis::none();
  cfg.t_final = 20.0;
  const Trajectory tr = simulate(cfg);
  REQUIRE_FALSE(tr.diverged_at.has_value());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    CHECK((tr.states[k].x - tr.states[k].x_n).norm_inf() <= 1e-12);
    CHECK(tr.signals[k].e.norm2() <= 1e-12);
  }
}

TEST_CASE("fixed gain on an uncertainty-free plant tracks the nominal model") {
  SimConfig cfg = parametric_config(ControllerVariant::FixedGainOnly, 3.0);
  cfg.plant.lambda_diag = Vector{1.0};
  cfg.plant.delta = TrueUncertainty::zero(2, 1);
  cfg.basis = RegressorBasis::none();
  cfg.t_final = 20.0;
  const Trajectory tr = simulate(cfg);
  REQUIRE_FALSE(tr.diverged_at.has_value());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    CHECK((tr.states[k].x - tr.states[k].x_n).norm_inf() <= 1e-9);
    CHECK(tr.signals[k].u_f.norm_inf() <= 1e-9);
  }
}

TEST_CASE("oracle equivalence of the implementable fixed-gain signal") {
  SimConfig fixed = parametric_config(ControllerVariant::FixedGainOnly, 3.0);
  fixed.basis = RegressorBasis::none();
  fixed.t_final = 10.0;
  CHECK(compare_uf_with_oracle(fixed).max_abs_deviation <= 1e-8);

  SimConfig symb = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
  symb.t_final = 10.0;
  CHECK(compare_uf_with_oracle(symb).max_abs_deviation <= 1e-8);

  SimConfig symb_np = nonparametric_config(ControllerVariant::SymbioticNonparametric, 3.0);
  symb_np.t_final = 10.0;
  CHECK(compare_uf_with_oracle(symb_np).max_abs_deviation <= 1e-8);
}

TEST_CASE("a single step keeps the bookkeeping and oracle forms together") {
  SimConfig cfg = parametric_config(ControllerVariant::FixedGainOnly, 3.0);
  cfg.basis = RegressorBasis::none();
  cfg.t_final = cfg.dt;  // exactly one step
  cfg.record_stride = 1;
  CHECK(compare_uf_with_oracle(cfg).max_abs_deviation <= 1e-12);
}

TEST_CASE("oracle fixed-gain derivative closed forms") {
  PlantSpec plant;
  plant.A = Matrix{{0, 1}, {0, 0}};
  plant.B = Matrix{{0}, {1}};
  plant.lambda_diag = Vector{0.9};
  plant.delta = TrueUncertainty(
      2, {{{0.2, {1, 0}}, {0.2, {0, 1}}, {0.8, {1, 1}}, {0.1, {3, 0}}, {0.1, {0, 2}}}});
  plant.x0 = Vector(2);

  const Vector x{0.4, -0.7};
  const Vector un{1.3};
  const Vector pi = total_uncertainty(plant, x, un);

  // u_f = -pi is the unique root of the fast dynamics
  CHECK(oracle_uf_dot(plant, 3.0, -pi, Vector{0}, un, x, Vector{0}).norm_inf() <= 1e-15);

  // alpha = 0 passes the gating integrand through
  CHECK(oracle_uf_dot(plant, 0.0, Vector{2}, Vector{1}, un, x, Vector{0.37})[0] ==
        doctest::Approx(0.37));

  // scalar arithmetic
  const double expected = -3.0 * 0.9 * (1.0 + 0.0 + pi[0]) + 0.0;
  CHECK(oracle_uf_dot(plant, 3.0, Vector{1}, Vector{0}, un, x, Vector{0})[0] ==
        doctest::Approx(expected));
}

TEST_CASE("higher leakage deviates further from the nominal model") {
  auto leak_run = [&](double beta2) {
    SimConfig cfg = nonparametric_config(ControllerVariant::StandardAdaptiveLeakage, 0.0);
    cfg.params.alpha = 0.0;
    cfg.params.beta2 = beta2;
    cfg.params.beta3 = 0.0;
    cfg.params.gamma1 = 0.0;
    cfg.params.gamma2 = 0.0;
    cfg.params.kappa = CompositeFn::identity();
    cfg.t_final = 40.0;
    return cfg;
  };
  SimConfig nominal = leak_run(1.0);
  nominal.variant = ControllerVariant::NominalOnly;
  nominal.basis = RegressorBasis::none();
  nominal.params = SymbioticParams{};

  const Trajectory nom = simulate(nominal);
  const RunMetrics low = metrics(simulate(leak_run(1.0)), nom);
  const RunMetrics high = metrics(simulate(leak_run(2.0)), nom);
  CHECK(high.ise > low.ise);
}

TEST_CASE("energy function closed forms") {
  SymbioticParams p;
  p.beta1 = 1.0;
  p.beta2 = 1.0;
  p.gamma1 = 1.0;
  p.kappa = CompositeFn::build(1.0, 2.0, 0.1);
  const Matrix P = Matrix::identity(2);

  CHECK(energy_V(p, P, Vector{0, 0}, Vector{0}, Matrix(6, 1), Matrix(1, 1), Vector{0.9}) ==
        doctest::Approx(0.0));

  // only the effectiveness error survives: beta1/gamma1 * |Lambda|_F^2
  CHECK(energy_V(p, P, Vector{0, 0}, Vector{0}, Matrix(6, 1), Matrix{{-0.9}}, Vector{0.9}) ==
        doctest::Approx(0.81));

  // any nonzero argument makes it positive when rho != 0
  CHECK(energy_V(p, P, Vector{0.1, 0}, Vector{0}, Matrix(6, 1), Matrix(1, 1), Vector{0.9}) > 0.0);
  CHECK(energy_V(p, P, Vector{0, 0}, Vector{0.3}, Matrix(6, 1), Matrix(1, 1), Vector{0.9}) > 0.0);
}

TEST_CASE("recorded energy dissipates along parametric symbiotic runs") {
  for (double alpha : {1.0, 3.0}) {
    SimConfig cfg = parametric_config(ControllerVariant::SymbioticParametric, alpha);
    cfg.t_final = 20.0;
    const Trajectory tr = simulate(cfg);
    REQUIRE_FALSE(tr.diverged_at.has_value());
    for (std::size_t k = 0; k + 1 < tr.times.size(); ++k) {
      const double dv = tr.signals[k + 1].V - tr.signals[k].V;
      CHECK(dv <= 1e-8 * (1.0 + tr.signals[k].V));
    }
    CHECK(tr.signals.front().V > 0.0);
  }
}

TEST_CASE("post-edge decay of the gated error and fixed-gain signal") {
  SimConfig cfg = parametric_config(ControllerVariant::SymbioticParametric, 1.0);
  cfg.t_final = 60.0;
  const Trajectory tr = simulate(cfg);
  REQUIRE_FALSE(tr.diverged_at.has_value());

  // constant-reference segments start at the square-wave edges
  for (double seg_start : {20.0, 40.0}) {
    const double seg_end = seg_start + 20.0;
    double peak_e = 0.0, peak_uf = 0.0, end_e = 0.0, end_uf = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      if (tr.times[k] < seg_start || tr.times[k] >= seg_end) continue;
      const double gated = tr.signals[k].kappa_prime * tr.signals[k].e.norm2();
      const double uf = tr.signals[k].u_f.norm2();
      peak_e = std::max(peak_e, gated);
      peak_uf = std::max(peak_uf, uf);
      end_e = gated;
      end_uf = uf;
    }
    CHECK(end_e <= 0.5 * peak_e);
    CHECK(end_uf <= 0.5 * peak_uf);
  }
}

TEST_CASE("metrics on identical and offset trajectories") {
  SimConfig cfg = parametric_config(ControllerVariant::NominalOnly, 0.0);
  cfg.params = SymbioticParams{};
  cfg.basis = RegressorBasis::none();
  cfg.t_final = 5.0;
  const Trajectory tr = simulate(cfg);

  const RunMetrics self = metrics(tr, tr);
  CHECK(self.ise == doctest::Approx(0.0));
  CHECK(self.sup_err == doctest::Approx(0.0));
  CHECK(self.control_effort > 0.0);

  // constant offset c over [0, T]: ise = c^2 T exactly under the trapezoid
  Trajectory shifted = tr;
  const double c = 0.75;
  for (auto& st : shifted.states) st.x[0] += c;
  const RunMetrics off = metrics(shifted, tr);
  CHECK(off.ise == doctest::Approx(c * c * cfg.t_final).epsilon(1e-12));
  CHECK(off.sup_err == doctest::Approx(c).epsilon(1e-12));

  Trajectory truncated = tr;
  truncated.times.pop_back();
  truncated.states.pop_back();
  truncated.signals.pop_back();
  CHECK_THROWS_AS(metrics(truncated, tr), GridMismatchError);
}

TEST_CASE("bound constants: structure and blow-up monotonicity") {
  SimConfig cfg = nonparametric_config(ControllerVariant::SymbioticNonparametric, 3.0);
  const SimContext ctx = validate_and_prepare(cfg);
  REQUIRE(ctx.W_truth.has_value());
  const Matrix R = Matrix::identity(2);

  const BoundConstants c = bound_constants(cfg.params, ctx.P, R, cfg.plant.B,
                                           cfg.plant.lambda_diag, *ctx.W_truth, ctx.eps_bar);
  CHECK(c.kappa_min_slope == doctest::Approx(0.1));
  CHECK(c.l1 == doctest::Approx(1.0 * (1.0 - 0.5) * 0.1));
  CHECK(c.l2 == doctest::Approx(1.0 * 3.0 * 1.0 * 0.8));
  CHECK(c.l3 == doctest::Approx(1.0 * 2.0 * 0.8));
  CHECK(c.l4 == doctest::Approx(1.0 * 1.0 * 2.0));
  CHECK(c.V_star > 0.0);
  CHECK(std::isfinite(c.V_star));

  // d1 -> lambda_min(R): l1 -> 0 and the bound blows up monotonically
  double prev = c.V_star;
  for (double d1 : {0.9, 0.99, 0.999}) {
    const BoundConstants worse =
        bound_constants(cfg.params, ctx.P, R, cfg.plant.B, cfg.plant.lambda_diag, *ctx.W_truth,
                        ctx.eps_bar, DChoices{d1, 1.0, 1.0, 1.0});
    CHECK(worse.V_star > prev);
    prev = worse.V_star;
  }

  CHECK_THROWS_AS(bound_constants(cfg.params, ctx.P, R, cfg.plant.B, cfg.plant.lambda_diag,
                                  *ctx.W_truth, ctx.eps_bar, DChoices{1.5, 1.0, 1.0, 1.0}),
                  InvalidDError);
  CHECK_THROWS_AS(bound_constants(cfg.params, ctx.P, R, cfg.plant.B, cfg.plant.lambda_diag,
                                  *ctx.W_truth, ctx.eps_bar, DChoices{0.5, 2.0, 1.0, 1.0}),
                  InvalidDError);
}

TEST_CASE("bound constants scalar effectiveness formula") {
  SymbioticParams p;
  p.alpha = 2.0;
  p.beta1 = 1.0;
  p.beta2 = 3.0;
  p.beta3 = 1.0;
  p.gamma1 = 1.0;
  p.gamma2 = 1.0;
  p.kappa = CompositeFn::build(1.0, 2.0, 0.5);
  const Matrix P = Matrix::identity(1);
  const Matrix R = Matrix::identity(1);
  const Matrix B = Matrix::identity(1);
  const BoundConstants c =
      bound_constants(p, P, R, B, Vector{0.6}, Matrix(2, 1), 0.0, DChoices{0.5, 0.5, 1.0, 1.0});
  // l2 = (2 - d2) alpha beta2 lambda
  CHECK(c.l2 == doctest::Approx(1.5 * 2.0 * 3.0 * 0.6));
}

TEST_CASE("divergence detector flags an unstable loop") {
  // weak fixed gain against a destabilizing uncertainty
  SimConfig cfg;
  cfg.variant = ControllerVariant::FixedGainOnly;
  cfg.plant.A = Matrix{{0, 1}, {0, 0}};
  cfg.plant.B = Matrix{{0}, {1}};
  cfg.plant.lambda_diag = Vector{1.0};
  cfg.plant.delta = TrueUncertainty(2, {{{2.0, {1, 0}}}});
  cfg.plant.x0 = Vector(2);
  cfg.gains.K1 = Matrix{{0.16, 0.57}};
  cfg.gains.K2 = Matrix{{0.16}};
  cfg.basis = RegressorBasis::none();
  cfg.params.alpha = 0.01;
  cfg.t_final = 100.0;

  const Trajectory tr = simulate(cfg);
  REQUIRE(tr.diverged_at.has_value());
  CHECK(*tr.diverged_at < 30.0);
  for (const auto& st : tr.states) CHECK(st.x.all_finite());
}

TEST_CASE("rk4 self-convergence is fourth order on the parametric scenario") {
  auto end_state = [&](double dt) {
    SimConfig cfg = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
    cfg.dt = dt;
    cfg.t_final = 30.0;
    cfg.record_stride = static_cast<std::size_t>(std::llround(0.01 / dt));
    const Trajectory tr = simulate(cfg);
    REQUIRE_FALSE(tr.diverged_at.has_value());
    return tr.states.back().x;
  };
  const Vector x1 = end_state(1e-2);
  const Vector x2 = end_state(5e-3);
  const Vector x3 = end_state(2.5e-3);
  const double e1 = (x1 - x2).norm2();
  const double e2 = (x2 - x3).norm2();
  REQUIRE(e2 > 0.0);
  // halving dt must cut the error by at least 12 (order ~ 4)
  CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("validation guards") {
  SimConfig cfg = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
  cfg.dt = 2e-2;  // stiffness guard with alpha >= 1
  CHECK_THROWS_AS(validate_and_prepare(cfg), ValidationError);

  SimConfig bad_gain = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
  bad_gain.gains.K1 = Matrix{{-1.0, -1.0}};
  CHECK_THROWS_AS(validate_and_prepare(bad_gain), ValidationError);

  SimConfig no_basis = parametric_config(ControllerVariant::StandardAdaptive, 0.0);
  no_basis.basis = RegressorBasis::none();
  CHECK_THROWS_AS(validate_and_prepare(no_basis), ValidationError);

  SimConfig bad_dt = parametric_config(ControllerVariant::SymbioticParametric, 3.0);
  bad_dt.dt = 0.0;
  CHECK_THROWS_AS(validate_and_prepare(bad_dt), ValidationError);
}
