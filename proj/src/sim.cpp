#include "symctl/sim.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace symctl {

namespace {

constexpr double kDivergenceNorm = 1e6;

void copy_into(Vector& flat, std::size_t off, const Vector& src) {
  for (std::size_t i = 0; i < src.size(); ++i) flat[off + i] = src[i];
}

Vector slice(const Vector& flat, std::size_t off, std::size_t len) {
  Vector out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = flat[off + i];
  return out;
}

}  // namespace

SimState SimState::zero(const StateLayout& lay) {
  SimState s;
  s.x = Vector(lay.n);
  s.x_n = Vector(lay.n);
  s.r_f = Vector(lay.p);
  s.q = Vector(lay.n);
  s.qg = Vector(lay.m);
  s.W_hat = Matrix(lay.s + lay.m, lay.m);
  s.Lambda_hat = Matrix(lay.m, lay.m);
  return s;
}

Vector flatten(const StateLayout& lay, const SimState& s) {
  Vector flat(lay.size());
  copy_into(flat, lay.x_off(), s.x);
  copy_into(flat, lay.xn_off(), s.x_n);
  copy_into(flat, lay.rf_off(), s.r_f);
  copy_into(flat, lay.q_off(), s.q);
  copy_into(flat, lay.qg_off(), s.qg);
  for (std::size_t i = 0; i < s.W_hat.rows(); ++i)
    for (std::size_t j = 0; j < s.W_hat.cols(); ++j)
      flat[lay.w_off() + i * lay.m + j] = s.W_hat(i, j);
  for (std::size_t i = 0; i < lay.m; ++i)
    for (std::size_t j = 0; j < lay.m; ++j) flat[lay.l_off() + i * lay.m + j] = s.Lambda_hat(i, j);
  return flat;
}

SimState unflatten(const StateLayout& lay, const Vector& flat) {
  if (flat.size() != lay.size()) throw SimError("unflatten: flat state length mismatch");
  SimState s;
  s.x = slice(flat, lay.x_off(), lay.n);
  s.x_n = slice(flat, lay.xn_off(), lay.n);
  s.r_f = slice(flat, lay.rf_off(), lay.p);
  s.q = slice(flat, lay.q_off(), lay.n);
  s.qg = slice(flat, lay.qg_off(), lay.m);
  s.W_hat = Matrix(lay.s + lay.m, lay.m);
  for (std::size_t i = 0; i < s.W_hat.rows(); ++i)
    for (std::size_t j = 0; j < lay.m; ++j) s.W_hat(i, j) = flat[lay.w_off() + i * lay.m + j];
  s.Lambda_hat = Matrix(lay.m, lay.m);
  for (std::size_t i = 0; i < lay.m; ++i)
    for (std::size_t j = 0; j < lay.m; ++j) s.Lambda_hat(i, j) = flat[lay.l_off() + i * lay.m + j];
  return s;
}

SimContext validate_and_prepare(const SimConfig& cfg) {
  auto fail = [](const std::string& why) { throw ValidationError(why); };

  if (!(cfg.dt > 0.0)) fail("sim.dt must be > 0");
  if (!(cfg.t_final >= cfg.dt)) fail("sim.t_final must be >= sim.dt");
  if (cfg.record_stride < 1) fail("sim.record_stride must be >= 1");

  try {
    cfg.plant.validate();
  } catch (const PlantError& e) {
    fail(e.what());
  }

  const std::size_t n = cfg.plant.n();
  const std::size_t m = cfg.plant.m();
  if (cfg.gains.K1.rows() != m || cfg.gains.K1.cols() != n) fail("gains.K1 must be m x n");
  if (cfg.gains.K2.rows() != m || cfg.gains.K2.cols() == 0) fail("gains.K2 must be m x p");
  const std::size_t p = cfg.gains.K2.cols();

  if (variant_has_adaptation(cfg.variant) && cfg.basis.kind() == RegressorBasis::Kind::None)
    fail(std::string("basis is required for variant ") + to_string(cfg.variant));
  if (cfg.basis.kind() != RegressorBasis::Kind::None && cfg.basis.state_dim() != n)
    fail("basis state dimension must match the plant");

  try {
    validate_variant_params(cfg.variant, cfg.params);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (cfg.params.alpha >= 1.0 && cfg.dt > 1e-2)
    fail("sim.dt must be <= 1e-2 when params.alpha >= 1 (stiffness guard)");

  if (!(cfg.reference.period > 0.0)) fail("reference.period must be > 0");
  if (!(cfg.reference.filter_time_constant > 0.0)) fail("reference.tau must be > 0");

  SimContext ctx;
  ctx.layout = StateLayout{n, m, p, cfg.basis.dim()};
  ctx.A_n = cfg.plant.A - cfg.plant.B * cfg.gains.K1;
  ctx.B_n = cfg.plant.B * cfg.gains.K2;
  if (!is_hurwitz(ctx.A_n)) fail("gains.K1: A - B K1 is not Hurwitz");
  ctx.B_i = left_pseudoinverse(cfg.plant.B);

  Matrix R = cfg.params.R;
  if (R.rows() == 0) R = Matrix::identity(n);
  if (R.rows() != n || R.cols() != n) fail("params.R must be n x n");
  try {
    ctx.P = solve_lyapunov(ctx.A_n, R);
  } catch (const LinalgError& e) {
    fail(std::string("params.R: ") + e.what());
  }

  // Ideal-weight diagnostics: exact for matching polynomial bases,
  // least-squares over the domain grid for RBF bases.
  if (cfg.basis.kind() == RegressorBasis::Kind::PolynomialFeatures) {
    if (auto W_delta = exact_polynomial_weight(cfg.plant.delta, cfg.basis)) {
      Matrix W(ctx.layout.s + m, m);
      for (std::size_t i = 0; i < ctx.layout.s; ++i)
        for (std::size_t j = 0; j < m; ++j) W(i, j) = (*W_delta)(i, j);
      for (std::size_t i = 0; i < m; ++i)
        W(ctx.layout.s + i, i) = 1.0 - 1.0 / cfg.plant.lambda_diag[i];
      ctx.W_truth = W;
      ctx.eps_bar = 0.0;
    }
  } else if (cfg.basis.kind() == RegressorBasis::Kind::RbfWithBias) {
    DomainGrid grid = cfg.domain;
    if (grid.lo.size() == 0) {
      grid.lo = Vector(n);
      grid.hi = Vector(n);
      for (std::size_t i = 0; i < n; ++i) {
        grid.lo[i] = -4.0;
        grid.hi[i] = 4.0;
      }
    }
    const IdealFit fit = ideal_weight_and_eps(cfg.plant, cfg.basis, grid);
    Matrix W(ctx.layout.s + m, m);
    for (std::size_t i = 0; i < ctx.layout.s; ++i)
      for (std::size_t j = 0; j < m; ++j) W(i, j) = fit.W_delta(i, j);
    for (std::size_t i = 0; i < m; ++i) W(ctx.layout.s + i, i) = 1.0 - 1.0 / cfg.plant.lambda_diag[i];
    ctx.W_truth = W;
    ctx.eps_bar = fit.eps_bar;
  }
  return ctx;
}

namespace {

// Controller-visible signal assembly; everything the adjustment laws and the
// plant input need at one (state) point. No truth quantities here.
struct ControlEval {
  Vector r, u_n, sigma, u_a, u_f, u_g, u, e;
  double z = 0.0, kappa_value = 0.0, kappa_prime = 1.0;
};

ControlEval eval_controls(const SimConfig& cfg, const SimContext& ctx, const SimState& st) {
  const StateLayout& lay = ctx.layout;
  ControlEval ev;
  ev.r = st.r_f;
  ev.u_n = nominal_control(cfg.gains, st.x, ev.r);
  ev.sigma = full_regressor(cfg.basis, st.x, ev.u_n);
  ev.e = st.x - st.x_n;

  ev.u_a = variant_has_adaptation(cfg.variant) ? adaptive_signal(st.W_hat, ev.sigma) : Vector(lay.m);

  AdaptiveState ad{st.W_hat, st.Lambda_hat, st.q, st.qg};
  ev.u_f = variant_has_fixed_gain(cfg.variant)
               ? fixed_gain_control(cfg.params.alpha, ctx.B_i, st.x, cfg.plant.x0, ad)
               : Vector(lay.m);

  ev.z = dot(ev.e, ctx.P * ev.e);
  if (variant_is_symbiotic(cfg.variant)) {
    const KappaValue kv = cfg.params.kappa.eval(std::max(ev.z, 0.0));
    ev.kappa_value = kv.value;
    ev.kappa_prime = kv.prime;
    ev.u_g = gating_signal(cfg.params, ctx.P, ev.e, st.Lambda_hat, cfg.plant.B, ev.kappa_prime);
  } else {
    ev.kappa_value = ev.z;
    ev.kappa_prime = 1.0;
    ev.u_g = Vector(lay.m);
  }
  ev.u = ev.u_n + ev.u_f + ev.u_a;
  return ev;
}

// Derivative of every state block. r_raw is the per-step held sample of the
// raw square wave.
Vector assemble_rhs(const SimConfig& cfg, const SimContext& ctx, const SimState& st,
                    const ControlEval& ev, double r_raw) {
  const StateLayout& lay = ctx.layout;
  SimState d = SimState::zero(lay);

  const Vector model_flow = ctx.A_n * st.x + ctx.B_n * ev.r;
  if (cfg.variant == ControllerVariant::NominalOnly) {
    d.x = model_flow;
  } else {
    // true plant: x_dot = A x + B Lambda (u + delta(x))
    Vector inner = ev.u + cfg.plant.delta.eval(st.x);
    for (std::size_t i = 0; i < lay.m; ++i) inner[i] *= cfg.plant.lambda_diag[i];
    d.x = cfg.plant.A * st.x + cfg.plant.B * inner;
  }
  d.x_n = ctx.A_n * st.x_n + ctx.B_n * ev.r;
  d.r_f = Vector(lay.p);
  for (std::size_t i = 0; i < lay.p; ++i)
    d.r_f[i] = (r_raw - st.r_f[i]) / cfg.reference.filter_time_constant;

  if (variant_has_fixed_gain(cfg.variant)) d.q = model_flow;
  if (variant_is_symbiotic(cfg.variant)) d.qg = ev.u_g;

  switch (cfg.variant) {
    case ControllerVariant::StandardAdaptive:
      d.W_hat = w_hat_dot_standard(cfg.params.beta1, ev.sigma, ev.e, ctx.P, cfg.plant.B);
      break;
    case ControllerVariant::StandardAdaptiveLeakage:
      d.W_hat = w_hat_dot_standard_leakage(cfg.params.beta1, cfg.params.beta2, ev.sigma, ev.e, ctx.P,
                                           cfg.plant.B, st.W_hat);
      break;
    case ControllerVariant::SymbioticParametric:
      d.W_hat = w_hat_dot_symbiotic_parametric(cfg.params, ev.kappa_prime, ev.sigma, ev.e, ctx.P,
                                               cfg.plant.B, ev.u_f);
      d.Lambda_hat = lambda_hat_dot_parametric(cfg.params.gamma1, ev.kappa_prime, ev.e, ctx.P,
                                               cfg.plant.B, ev.u_f);
      break;
    case ControllerVariant::SymbioticNonparametric:
      d.W_hat = w_hat_dot_symbiotic_nonparametric(cfg.params, ev.kappa_prime, ev.sigma, ev.e, ctx.P,
                                                  cfg.plant.B, ev.u_f, st.W_hat);
      d.Lambda_hat = lambda_hat_dot_leakage(cfg.params.gamma1, cfg.params.gamma2, ev.kappa_prime,
                                            ev.e, ctx.P, cfg.plant.B, ev.u_f, st.Lambda_hat);
      break;
    default:
      break;
  }
  return flatten(lay, d);
}

Vector rhs_held(const SimConfig& cfg, const SimContext& ctx, const Vector& flat, double r_raw,
                ControlEval* ev_out = nullptr) {
  if (!flat.all_finite()) throw NonFiniteStateError("rhs: state contains non-finite entries");
  const SimState st = unflatten(ctx.layout, flat);
  ControlEval ev = eval_controls(cfg, ctx, st);
  Vector d = assemble_rhs(cfg, ctx, st, ev, r_raw);
  if (ev_out != nullptr) *ev_out = std::move(ev);
  return d;
}

// Diagnostic record at one snapshot; truth quantities (pi, V) are computed
// here, outside the derivative path.
Signals make_record(const SimConfig& cfg, const SimContext& ctx, const SimState& st,
                    const ControlEval& ev) {
  Signals sg;
  sg.u = ev.u;
  sg.u_n = ev.u_n;
  sg.u_f = ev.u_f;
  sg.u_a = ev.u_a;
  sg.u_g = ev.u_g;
  sg.e = ev.e;
  sg.z = ev.z;
  sg.kappa_value = ev.kappa_value;
  sg.kappa_prime = ev.kappa_prime;
  sg.pi = cfg.variant == ControllerVariant::NominalOnly
              ? Vector(ctx.layout.m)
              : total_uncertainty(cfg.plant, st.x, ev.u_n);
  if (variant_is_symbiotic(cfg.variant) && ctx.W_truth.has_value()) {
    const Matrix W_tilde = st.W_hat - *ctx.W_truth;
    const Matrix L_tilde = st.Lambda_hat - cfg.plant.lambda_matrix();
    sg.V = energy_V(cfg.params, ctx.P, ev.e, ev.u_f, W_tilde, L_tilde, cfg.plant.lambda_diag);
  }
  return sg;
}

}  // namespace

Vector rhs(const SimConfig& cfg, const SimContext& ctx, double t, const Vector& flat) {
  return rhs_held(cfg, ctx, flat, reference_square(cfg.reference, t));
}

Vector rk4_step(const std::function<Vector(double, const Vector&)>& f, double t, const Vector& s,
                double dt) {
  if (!(dt > 0.0)) throw SimError("rk4_step: dt must be > 0");
  const Vector k1 = f(t, s);
  const Vector k2 = f(t + 0.5 * dt, s + (0.5 * dt) * k1);
  const Vector k3 = f(t + 0.5 * dt, s + (0.5 * dt) * k2);
  const Vector k4 = f(t + dt, s + dt * k3);
  Vector out = s;
  out += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return out;
}

namespace {

// Shared integration loop. extra_dim appends oracle states integrated with
// the same stage values; extra_rhs maps (control eval, extra block) to its
// derivative, and on_record observes (record index, eval, extra block).
struct LoopHooks {
  std::size_t extra_dim = 0;
  std::function<Vector(const ControlEval&, const SimState&, const Vector&)> extra_rhs;
  std::function<void(const ControlEval&, const Vector&)> on_record;
};

Trajectory run_loop(const SimConfig& cfg, const SimContext& ctx, const LoopHooks& hooks) {
  const StateLayout& lay = ctx.layout;

  SimState init = SimState::zero(lay);
  init.x = cfg.plant.x0;
  init.x_n = cfg.plant.x0;  // e(0) = 0
  Vector base = flatten(lay, init);
  Vector flat = concat(base, Vector(hooks.extra_dim));

  auto stage_rhs = [&](const Vector& aug, double r_raw) {
    const Vector core = slice(aug, 0, lay.size());
    ControlEval ev;
    const Vector d_core = rhs_held(cfg, ctx, core, r_raw, &ev);
    if (hooks.extra_dim == 0) return d_core;
    const SimState st = unflatten(lay, core);
    const Vector extra = slice(aug, lay.size(), hooks.extra_dim);
    return concat(d_core, hooks.extra_rhs(ev, st, extra));
  };

  Trajectory tr;
  const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    if (i % cfg.record_stride == 0 || i == steps) {
      const Vector core = slice(flat, 0, lay.size());
      const SimState st = unflatten(lay, core);
      const ControlEval ev = eval_controls(cfg, ctx, st);
      tr.times.push_back(t);
      tr.states.push_back(st);
      tr.signals.push_back(make_record(cfg, ctx, st, ev));
      if (hooks.on_record) hooks.on_record(ev, slice(flat, lay.size(), hooks.extra_dim));
    }
    if (i == steps) break;

    const double r_raw = reference_square(cfg.reference, t);
    const Vector k1 = stage_rhs(flat, r_raw);
    const Vector k2 = stage_rhs(flat + (0.5 * cfg.dt) * k1, r_raw);
    const Vector k3 = stage_rhs(flat + (0.5 * cfg.dt) * k2, r_raw);
    const Vector k4 = stage_rhs(flat + cfg.dt * k3, r_raw);
    flat += (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!flat.all_finite() || flat.norm2() > kDivergenceNorm) {
      tr.diverged_at = static_cast<double>(i + 1) * cfg.dt;
      break;
    }
  }
  return tr;
}

}  // namespace

Trajectory simulate(const SimConfig& cfg) {
  const SimContext ctx = validate_and_prepare(cfg);
  return run_loop(cfg, ctx, LoopHooks{});
}

Vector oracle_uf_dot(const PlantSpec& truth, double alpha, const Vector& u_f, const Vector& u_a,
                     const Vector& u_n, const Vector& x, const Vector& u_g) {
  Vector inner = u_f + u_a + total_uncertainty(truth, x, u_n);
  for (std::size_t i = 0; i < inner.size(); ++i) inner[i] *= truth.lambda_diag[i];
  return -alpha * inner + u_g;
}

OracleComparison compare_uf_with_oracle(const SimConfig& cfg) {
  const SimContext ctx = validate_and_prepare(cfg);
  if (!variant_has_fixed_gain(cfg.variant))
    throw ValidationError("compare_uf_with_oracle: variant has no fixed-gain signal");

  OracleComparison cmp;
  LoopHooks hooks;
  hooks.extra_dim = ctx.layout.m;
  hooks.extra_rhs = [&](const ControlEval& ev, const SimState& st, const Vector& uf_oracle) {
    return oracle_uf_dot(cfg.plant, cfg.params.alpha, uf_oracle, ev.u_a, ev.u_n, st.x, ev.u_g);
  };
  hooks.on_record = [&](const ControlEval& ev, const Vector& uf_oracle) {
    const Vector diff = ev.u_f - uf_oracle;
    cmp.max_abs_deviation = std::max(cmp.max_abs_deviation, diff.norm_inf());
  };
  cmp.trajectory = run_loop(cfg, ctx, hooks);
  return cmp;
}

double energy_V(const SymbioticParams& params, const Matrix& P, const Vector& e, const Vector& u_f,
                const Matrix& W_tilde, const Matrix& Lambda_tilde, const Vector& lambda_true) {
  const double z = dot(e, P * e);
  const KappaValue kv = params.kappa.eval(std::max(z, 0.0));
  double v = params.beta1 * kv.value + params.beta2 * dot(u_f, u_f);
  for (std::size_t i = 0; i < W_tilde.rows(); ++i)
    for (std::size_t j = 0; j < W_tilde.cols(); ++j)
      v += W_tilde(i, j) * W_tilde(i, j) * lambda_true[j];
  double lt = 0.0;
  for (std::size_t i = 0; i < Lambda_tilde.rows(); ++i)
    for (std::size_t j = 0; j < Lambda_tilde.cols(); ++j) lt += Lambda_tilde(i, j) * Lambda_tilde(i, j);
  return v + params.beta1 / params.gamma1 * lt;
}

BoundConstants bound_constants(const SymbioticParams& params, const Matrix& P, const Matrix& R,
                               const Matrix& B, const Vector& lambda_true, const Matrix& W_true,
                               double eps_bar, const std::optional<DChoices>& d_choices) {
  const auto [lam_min_R, lam_max_R] = sym_eig_extremes(R);
  (void)lam_max_R;
  const auto [lam_min_P, lam_max_P] = sym_eig_extremes(P);
  (void)lam_min_P;

  double lam_min = lambda_true[0], lam_max = lambda_true[0];
  for (std::size_t i = 1; i < lambda_true.size(); ++i) {
    lam_min = std::min(lam_min, lambda_true[i]);
    lam_max = std::max(lam_max, lambda_true[i]);
  }

  const DChoices d = d_choices.value_or(DChoices{0.5 * lam_min_R, 1.0, 1.0, 1.0});
  if (!(d.d1 > 0.0 && d.d1 < lam_min_R)) throw InvalidDError("d1 must lie in (0, lambda_min(R))");
  for (double di : {d.d2, d.d3, d.d4})
    if (!(di > 0.0 && di < 2.0)) throw InvalidDError("d2, d3, d4 must lie in (0, 2)");

  const double kappa_min = params.kappa.min_slope();
  const double kappa_max = params.kappa.max_slope();
  if (!(kappa_min > 0.0))
    throw InvalidDError("bound_constants: composite minimum slope must be positive (rho != 0)");

  BoundConstants c{};
  c.d = d;
  c.kappa_min_slope = kappa_min;
  c.kappa_max_slope = kappa_max;
  c.eps_bar = eps_bar;

  const double norm_P = std::max(std::abs(lam_max_P), std::abs(lam_min_P));
  const double norm_B = induced_norm2(B);
  const double norm_L = lam_max;  // diagonal positive

  c.l1 = params.beta1 * (lam_min_R - d.d1) * kappa_min;
  c.l2 = (2.0 - d.d2) * params.alpha * params.beta2 * lam_min;
  c.l3 = (2.0 - d.d3) * params.beta3 * lam_min;
  c.l4 = (2.0 - d.d4) * params.beta1 / params.gamma1 * params.gamma2;
  c.l5 = params.beta1 * kappa_max / d.d1 * norm_P * norm_P * norm_B * norm_B * norm_L * norm_L *
             eps_bar * eps_bar +
         params.alpha * params.beta2 / d.d2 * norm_L * eps_bar * eps_bar +
         params.beta3 / d.d3 * W_true.frobenius_norm() * W_true.frobenius_norm() * lam_max +
         params.beta1 / params.gamma1 * params.gamma2 / d.d4 * lam_max * lam_max;
  c.V_star = params.beta1 * lam_max_P / c.l1 * c.l5 + params.beta2 / c.l2 * c.l5 +
             lam_max / c.l3 * c.l5 + params.beta1 / params.gamma1 / c.l4 * c.l5;
  return c;
}

RunMetrics metrics(const Trajectory& tr, const Trajectory& nominal) {
  if (tr.times.size() != nominal.times.size())
    throw GridMismatchError("metrics: trajectories have different lengths");
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    if (std::abs(tr.times[i] - nominal.times[i]) > 1e-12)
      throw GridMismatchError("metrics: time grids differ");

  RunMetrics m;
  double prev_e2 = 0.0, prev_u2 = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const Vector err = tr.states[i].x - nominal.states[i].x;
    const double e2 = dot(err, err);
    const double u2 = dot(tr.signals[i].u, tr.signals[i].u);
    m.sup_err = std::max(m.sup_err, std::sqrt(e2));
    if (i > 0) {
      const double h = tr.times[i] - tr.times[i - 1];
      m.ise += 0.5 * h * (e2 + prev_e2);
      m.control_effort += 0.5 * h * (u2 + prev_u2);
    }
    prev_e2 = e2;
    prev_u2 = u2;
  }
  return m;
}

}  // namespace symctl
