#include "symctl/plant.hpp"

#include <cmath>
#include <string>

namespace symctl {

TrueUncertainty::TrueUncertainty(std::size_t state_dim, std::vector<std::vector<MonomialTerm>> channels)
    : n_(state_dim), terms_(std::move(channels)) {
  for (const auto& channel : terms_)
    for (const auto& term : channel) {
      if (term.exponents.size() != n_)
        throw PlantError("TrueUncertainty: exponent vector length != state dimension");
      if (!std::isfinite(term.coeff)) throw PlantError("TrueUncertainty: non-finite coefficient");
    }
}

TrueUncertainty TrueUncertainty::zero(std::size_t state_dim, std::size_t channels) {
  return TrueUncertainty(state_dim, std::vector<std::vector<MonomialTerm>>(channels));
}

Vector TrueUncertainty::eval(const Vector& x) const {
  Vector out(terms_.size());
  for (std::size_t c = 0; c < terms_.size(); ++c) {
    double acc = 0.0;
    for (const auto& term : terms_[c]) {
      double v = term.coeff;
      for (std::size_t i = 0; i < term.exponents.size(); ++i)
        for (unsigned k = 0; k < term.exponents[i]; ++k) v *= x[i];
      acc += v;
    }
    out[c] = acc;
  }
  return out;
}

RegressorBasis RegressorBasis::none() { return RegressorBasis{}; }

RegressorBasis RegressorBasis::polynomial(std::size_t state_dim, std::vector<std::vector<unsigned>> monomials) {
  RegressorBasis b;
  b.kind_ = Kind::PolynomialFeatures;
  b.n_ = state_dim;
  for (const auto& mono : monomials)
    if (mono.size() != state_dim)
      throw PlantError("RegressorBasis: monomial exponent length != state dimension");
  b.monomials_ = std::move(monomials);
  return b;
}

RegressorBasis RegressorBasis::rbf_with_bias(std::size_t state_dim, std::vector<RbfUnit> units, double width) {
  if (!(width > 0.0)) throw PlantError("RegressorBasis: RBF width must be positive");
  RegressorBasis b;
  b.kind_ = Kind::RbfWithBias;
  b.n_ = state_dim;
  for (const auto& u : units)
    if (u.coord >= state_dim) throw PlantError("RegressorBasis: RBF coordinate out of range");
  b.units_ = std::move(units);
  b.width_ = width;
  return b;
}

std::size_t RegressorBasis::dim() const {
  switch (kind_) {
    case Kind::None:
      return 0;
    case Kind::PolynomialFeatures:
      return monomials_.size();
    case Kind::RbfWithBias:
      return 1 + units_.size();
  }
  return 0;
}

Vector RegressorBasis::eval(const Vector& x) const {
  if (kind_ == Kind::None) return Vector(0);
  if (x.size() != n_) throw PlantError("eval_basis: x dimension mismatch");
  if (kind_ == Kind::PolynomialFeatures) {
    Vector out(monomials_.size());
    for (std::size_t k = 0; k < monomials_.size(); ++k) {
      double v = 1.0;
      for (std::size_t i = 0; i < n_; ++i)
        for (unsigned e = 0; e < monomials_[k][i]; ++e) v *= x[i];
      out[k] = v;
    }
    return out;
  }
  Vector out(1 + units_.size());
  out[0] = 1.0;  // unity bias
  for (std::size_t k = 0; k < units_.size(); ++k) {
    const double d = (x[units_[k].coord] - units_[k].center) / width_;
    out[1 + k] = std::exp(-0.5 * d * d);
  }
  return out;
}

Vector eval_delta(const TrueUncertainty& u, const Vector& x) { return u.eval(x); }
Vector eval_basis(const RegressorBasis& basis, const Vector& x) { return basis.eval(x); }

Vector full_regressor(const RegressorBasis& basis, const Vector& x, const Vector& u_n) {
  return concat(basis.eval(x), u_n);
}

void PlantSpec::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) throw PlantError("plant.A must be square and nonempty");
  if (B.rows() != A.rows() || B.cols() == 0) throw PlantError("plant.B shape inconsistent with A");
  if (lambda_diag.size() != B.cols()) throw PlantError("plant.lambda must have one entry per input");
  for (std::size_t i = 0; i < lambda_diag.size(); ++i)
    if (!(lambda_diag[i] > 0.0)) throw PlantError("plant.lambda entries must be strictly positive");
  if (x0.size() != A.rows()) throw PlantError("plant.x0 dimension mismatch");
  if (delta.channels() != B.cols()) throw PlantError("plant.delta must have one channel per input");
  if (delta.state_dim() != A.rows()) throw PlantError("plant.delta state dimension mismatch");
  try {
    left_pseudoinverse(B);
  } catch (const RankDeficientError&) {
    throw PlantError("plant.B must have full column rank");
  }
  if (controllability_rank(A, B) != A.rows()) throw PlantError("plant (A,B) must be controllable");
}

Vector total_uncertainty(const PlantSpec& spec, const Vector& x, const Vector& u_n) {
  Vector pi = spec.delta.eval(x);
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] += (1.0 - 1.0 / spec.lambda_diag[i]) * u_n[i];
  return pi;
}

IdealFit ideal_weight_and_eps(const PlantSpec& spec, const RegressorBasis& basis, const DomainGrid& grid) {
  const std::size_t n = spec.n();
  if (grid.lo.size() != n || grid.hi.size() != n)
    throw PlantError("ideal_weight_and_eps: domain grid dimension mismatch");
  if (grid.points_per_axis < 2) throw PlantError("ideal_weight_and_eps: need >= 2 points per axis");
  const std::size_t s = basis.dim();
  if (s == 0) throw PlantError("ideal_weight_and_eps: basis is empty");

  // Normal equations accumulated over the full tensor grid.
  Matrix G(s, s);
  Matrix Y(s, spec.m());
  std::vector<std::size_t> idx(n, 0);
  Vector x(n);
  auto fill_x = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      const double f = static_cast<double>(idx[i]) / static_cast<double>(grid.points_per_axis - 1);
      x[i] = grid.lo[i] + f * (grid.hi[i] - grid.lo[i]);
    }
  };
  bool done = false;
  std::vector<Vector> grid_sigma;
  std::vector<Vector> grid_delta;
  while (!done) {
    fill_x();
    const Vector sig = basis.eval(x);
    const Vector d = spec.delta.eval(x);
    grid_sigma.push_back(sig);
    grid_delta.push_back(d);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) G(i, j) += sig[i] * sig[j];
      for (std::size_t c = 0; c < spec.m(); ++c) Y(i, c) += sig[i] * d[c];
    }
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (++idx[i] < grid.points_per_axis) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }

  Matrix W;
  try {
    W = solve_linear(G, Y);
  } catch (const SingularMatrixError&) {
    throw RankDeficientError("ideal_weight_and_eps: basis Gram matrix is singular on the grid");
  }

  double eps_bar = 0.0;
  for (std::size_t k = 0; k < grid_sigma.size(); ++k) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < spec.m(); ++c) {
      double fit = 0.0;
      for (std::size_t i = 0; i < s; ++i) fit += W(i, c) * grid_sigma[k][i];
      const double r = grid_delta[k][c] - fit;
      r2 += r * r;
    }
    eps_bar = std::max(eps_bar, std::sqrt(r2));
  }
  return {W, eps_bar};
}

std::optional<Matrix> exact_polynomial_weight(const TrueUncertainty& delta, const RegressorBasis& basis) {
  if (basis.kind() != RegressorBasis::Kind::PolynomialFeatures) return std::nullopt;
  const auto& monos = basis.monomials();
  Matrix W(basis.dim(), delta.channels());
  for (std::size_t c = 0; c < delta.channels(); ++c) {
    for (const auto& term : delta.terms()[c]) {
      bool matched = false;
      for (std::size_t k = 0; k < monos.size(); ++k) {
        if (monos[k] == term.exponents) {
          W(k, c) += term.coeff;
          matched = true;
          break;
        }
      }
      if (!matched) return std::nullopt;
    }
  }
  return W;
}

double reference_square(const ReferenceSignal& sig, double t) {
  if (t < 0.0) throw PlantError("reference_square: t must be >= 0");
  const double phase = std::fmod(t, sig.period);
  return phase < 0.5 * sig.period ? sig.amplitude : -sig.amplitude;
}

}  // namespace symctl
