#include "lindstab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace lindstab {

namespace {

constexpr double kRelTol = 1e-12;
constexpr long kMaxTerms = 10'000'000;

// (e^{x} − 1 − x)/v with x = vt, stable for small x; → 0 as v → 0.
double phi2(double v, double t) {
  const double x = v * t;
  if (std::abs(x) < 1e-4) return v * t * t * (0.5 + x / 6.0 + x * x / 24.0);
  return (std::expm1(x) - x) / v;
}

// Σ_{δ≥0} term(δ); `tail(N)` bounds Σ_{δ>N} once valid(N) holds.
double sum_with_tail(const std::function<double(long)>& term,
                     const std::function<bool(long)>& valid,
                     const std::function<double(long)>& tail) {
  double s = 0.0;
  for (long n = 0; n < kMaxTerms; ++n) {
    s += term(n);
    if ((n & 15) == 15 && valid(n)) {
      const double tb = tail(n);
      if (tb <= kRelTol * s) return s + tb;
    }
  }
  const long n = kMaxTerms - 1;
  return valid(n) ? s + tail(n) : std::numeric_limits<double>::infinity();
}

// Tail from a decreasing ratio bound: Σ_{δ>N} ≤ term(N) q/(1 − q), q = term ratio at N.
struct RatioTail {
  std::function<double(long)> term;
  std::function<double(long)> ratio;  // sup_{δ≥N} term(δ+1)/term(δ)
  bool valid(long n) const { return ratio(n) < 1.0; }
  double tail(long n) const {
    const double q = ratio(n);
    return term(n) * q / (1.0 - q);
  }
};

}  // namespace

std::string to_string(LRClass c) { return c == LRClass::exponential ? "exp" : "power"; }

double nu(LRClass cls, double mu, double r) {
  if (r < 0) throw DomainError("nu needs r >= 0");
  return cls == LRClass::exponential ? std::exp(mu * r) : std::pow(1.0 + r, mu);
}

double lr_velocity(double J, const DecayProfile& f, int D, LRClass cls, double mu) {
  if (J < 0 || D < 1 || mu <= 0) throw DomainError("lr_velocity needs J >= 0, D >= 1, mu > 0");
  using K = DecayProfile::Kind;
  const double twoD = 2.0 * D;
  auto term = [&](long d) { return f(double(d)) * nu(cls, mu, double(d)) * std::pow(2.0 * d + 1, twoD); };
  if (J == 0.0) return 0.0;
  double s = 0.0;
  switch (f.kind) {
    case K::finite_range: {
      for (long d = 0; d <= long(f.param); ++d) s += term(d);
      break;
    }
    case K::exponential: {
      if (cls == LRClass::exponential && !(mu < f.param))
        throw DivergenceError("exponential decay rate must exceed mu (mu < mu_f violated)");
      const double mf = f.param;
      RatioTail rt{term, [&](long n) {
                     const double growth = std::pow((2.0 * n + 3) / (2.0 * n + 1), twoD);
                     const double nu_ratio = cls == LRClass::exponential
                                                 ? std::exp(mu)
                                                 : std::pow((2.0 + n) / (1.0 + n), mu);
                     return std::exp(-mf) * nu_ratio * growth;
                   }};
      s = sum_with_tail(term, [&](long n) { return rt.valid(n); }, [&](long n) { return rt.tail(n); });
      break;
    }
    case K::quasi_local: {
      if (cls == LRClass::exponential)
        throw DivergenceError("quasi-local decay cannot beat exp(mu r) for any mu > 0");
      const double a = f.param, m = mu + twoD, c = a / 2;
      if (a <= 0) throw DivergenceError("quasi-local decay needs a > 0");
      auto valid = [&](long n) { return std::sqrt(double(n)) >= 4 * m / a; };
      auto tail = [&](long n) {
        const double x = double(n), rx = std::sqrt(x);
        const double h = std::pow(1 + x, m) * std::exp(-c * rx);
        return std::pow(2.0, twoD) * h * 2 * std::exp(-c * rx) * (c * rx + 1) / (c * c);
      };
      s = sum_with_tail(term, valid, tail);
      break;
    }
    case K::power: {
      if (cls == LRClass::exponential)
        throw DivergenceError("power-law decay cannot beat exp(mu r) for any mu > 0");
      const double p = f.param - mu - twoD;
      if (!(p > 1))
        throw DivergenceError("power-law series diverges: need alpha > 2D + 1 + mu");
      auto tail = [&](long n) { return std::pow(2.0, twoD) * std::pow(1.0 + n, 1 - p) / (p - 1); };
      s = sum_with_tail(term, [](long) { return true; }, tail);
      break;
    }
  }
  if (!std::isfinite(s)) throw DivergenceError("Lieb-Robinson series did not converge");
  return 2.0 * J * s;
}

double beta_exponent(double alpha, int D) {
  if (D < 1 || !(alpha > 2.0 * D + 1)) throw DomainError("beta_exponent needs alpha > 2D + 1");
  if (alpha >= 5.0 * D - 1) return alpha - 3.0 * D;
  return 0.5 * (alpha - D - 1);
}

BoundContext make_context(int D, double J, const DecayProfile& profile, LRClass cls, double mu,
                          double gamma, double delta) {
  BoundContext c;
  c.D = D;
  c.J = J;
  c.profile = profile;
  c.lr = {cls, mu, lr_velocity(J, profile, D, cls, mu)};
  c.gamma = gamma;
  c.delta = delta;
  if (cls == LRClass::power && profile.kind == DecayProfile::Kind::power)
    c.beta = beta_exponent(profile.param, D);
  else
    c.beta = mu / 2;
  return c;
}

CompatReport compat_check(const BoundContext& ctx) {
  CompatReport r;
  const double alpha = ctx.profile.kind == DecayProfile::Kind::power
                           ? ctx.profile.param
                           : std::numeric_limits<double>::infinity();
  const double D = ctx.D, v = ctx.lr.v, g = ctx.gamma, dl = ctx.delta, b = ctx.beta;
  r.cc1 = alpha > 3 * D + 2;
  r.cc2 = b > (v / g) * (v + g + D * dl);
  r.cc3 = b >= v + g - D * dl;
  r.k_bar = (b + D * dl) / (v + g);
  r.delta0 = g * b / (v + g) - v * D * dl / (v + g);
  r.gamma_tilde = r.delta0;
  r.epsilon_tilde_defined = r.gamma_tilde > v;
  if (r.epsilon_tilde_defined) r.epsilon_tilde = r.gamma_tilde * ctx.lr.mu / (r.gamma_tilde - v);
  r.epsilon_opt = r.gamma_tilde > 0 ? r.gamma_tilde * ctx.lr.mu / (v + r.gamma_tilde) : 0.0;
  return r;
}

double bound_localization(const BoundContext& ctx, double A_size, double O_norm, double t,
                          double r) {
  if (t < 0 || r < 0) throw DomainError("bound_localization needs t, r >= 0");
  return O_norm * A_size * ctx.J * phi2(ctx.lr.v, t) / nu(ctx.lr.cls, ctx.beta, r);
}

double bound_lr(const BoundContext& ctx, double K_norm, double O_norm, double C, double t,
                double dist) {
  if (t < 0 || dist < 0) throw DomainError("bound_lr needs t, dist >= 0");
  return K_norm * O_norm * C * std::expm1(ctx.lr.v * t) / nu(ctx.lr, dist);
}

double delta0_time(const BoundContext& ctx, double s) {
  if (s < 0) throw DomainError("delta0 needs s >= 0");
  if (!(ctx.lr.v > 0)) throw DomainError("delta0 needs a positive velocity");
  if (ctx.lr.cls == LRClass::exponential) return ctx.beta * s / (2 * ctx.lr.v);
  CompatReport c = compat_check(ctx);
  if (!c.all()) throw InfeasibilityError("power-law context fails the compatibility conditions");
  return c.k_bar * std::log1p(s);
}

double delta0_envelope(const BoundContext& ctx, double s) {
  const double t = delta0_time(ctx, s);
  const double v = ctx.lr.v;
  const double p = std::pow(1 + 2 * s, ctx.D * ctx.delta);
  // e^{vt}/ν_β(s) formed in log space to avoid overflow at large s
  const double log_nu = ctx.lr.cls == LRClass::exponential ? ctx.beta * s : ctx.beta * std::log1p(s);
  return ctx.J / v * std::exp(v * t - log_nu) + p * std::exp(-ctx.gamma * t);
}

namespace {

struct GTilde {
  bool power = false;
  double mu = 0, v = 0, rate = 0, k = 0;
  double operator()(double d) const {
    if (!power) {
      const double t0 = 0.5 * mu * std::log(v) / v * d;
      return std::exp(-0.5 * mu * d) + std::exp(-rate * t0) / rate;
    }
    return std::pow(1 + d, v * k - mu) + std::pow(1 + d, -rate * k) / rate;
  }
  // term ~ d^{−p}; +∞ for exponential decay
  double power_exponent() const {
    if (!power) return std::numeric_limits<double>::infinity();
    return std::min(mu - v * k, rate * k);
  }
};

GTilde make_gtilde(const BoundContext& ctx) {
  GTilde g;
  g.mu = ctx.lr.mu;
  g.v = ctx.lr.v;
  if (ctx.lr.cls == LRClass::exponential) {
    if (!(ctx.lr.v > 1))
      throw InfeasibilityError("t0(delta) = (mu/2)(log v / v) delta is not increasing for v <= 1");
    if (!(ctx.gamma > 0)) throw InfeasibilityError("stability envelope needs gamma > 0");
    g.rate = ctx.gamma;
    return g;
  }
  CompatReport c = compat_check(ctx);
  if (!c.all() || !c.epsilon_tilde_defined)
    throw InfeasibilityError("power-law context fails the compatibility conditions");
  g.power = true;
  g.rate = c.gamma_tilde;
  g.k = ctx.lr.mu / (c.gamma_tilde - ctx.lr.v);
  return g;
}

// Σ_r e(r) and the tail function r ↦ Σ_{s>r} e(s), tabulated to n.
std::vector<double> tails_of(const DecayProfile& e, long n, double& total) {
  using K = DecayProfile::Kind;
  std::vector<double> vals(n + 1);
  for (long r = 0; r <= n; ++r) vals[r] = e(double(r));
  double beyond = 0.0;  // Σ_{r>n} e(r)
  switch (e.kind) {
    case K::finite_range:
      break;
    case K::exponential:
      beyond = e.param > 0 ? std::exp(-e.param * (n + 1)) / -std::expm1(-e.param)
                           : std::numeric_limits<double>::infinity();
      break;
    case K::quasi_local: {
      const double c = e.param, x = double(n), rx = std::sqrt(x);
      beyond = c > 0 ? 2 * std::exp(-c * rx) * (c * rx + 1) / (c * c)
                     : std::numeric_limits<double>::infinity();
      break;
    }
    case K::power:
      beyond = e.param > 1 ? std::pow(1.0 + n, 1 - e.param) / (e.param - 1)
                           : std::numeric_limits<double>::infinity();
      break;
  }
  std::vector<double> tail(n + 1);
  double acc = beyond;
  for (long r = n; r >= 0; --r) {
    tail[r] = acc;
    acc += vals[r];
  }
  total = acc;
  return tail;
}

}  // namespace

double stability_gtilde(const BoundContext& ctx, double delta) { return make_gtilde(ctx)(delta); }

StabilityEnvelope stability_envelope(const BoundContext& ctx, double A_size,
                                     const DecayProfile& e) {
  if (A_size < 1) throw DomainError("stability envelope needs |A| >= 1");
  using K = DecayProfile::Kind;
  StabilityEnvelope out;
  const bool zero_e = (e.kind == K::finite_range && e.param < 0);
  if (zero_e) return out;
  const GTilde g = make_gtilde(ctx);

  // asymptotic power of the outer terms; +∞ means faster than any power
  const double D = ctx.D;
  double p_inner = g.power_exponent();
  if (e.kind == K::power) p_inner = std::min(p_inner, e.param - 1);
  const double p_outer = p_inner - (D - 1);
  if (!(p_outer > 1))
    throw InfeasibilityError("stability series does not converge: perturbation or envelope decays too slowly");

  const long n_max = 20000;
  double sum_e = 0.0;
  std::vector<double> tail_e = tails_of(e, n_max + 1, sum_e);
  if (!std::isfinite(sum_e)) throw InfeasibilityError("perturbation profile is not summable");
  std::vector<double> ev(n_max + 1), gv(n_max + 1);
  for (long r = 0; r <= n_max; ++r) {
    ev[r] = e(double(r));
    gv[r] = g(double(r));
  }
  const double side = std::pow(A_size, 1.0 / D);
  auto q = [&](double d) { return std::pow(side + 2 * d, D) - std::pow(side + 2 * d - 2, D); };

  double outer = 0.0, last = 0.0;
  long d = 1;
  int quiet = 0;
  for (; d <= n_max; ++d) {
    double conv = 0.0;
    for (long r = 0; r <= d; ++r) conv += ev[r] * gv[d - r];
    last = q(double(d)) * (conv + gv[0] * tail_e[d]);
    outer += last;
    if (std::isfinite(p_outer)) {
      // asymptotic integral tail of a d^{−p} sequence
      if (last * d / (p_outer - 1) <= kRelTol * outer) break;
    } else {
      quiet = last <= kRelTol * outer ? quiet + 1 : 0;
      if (quiet >= 16) break;
    }
  }
  if (std::isfinite(p_outer)) outer += last * double(std::min(d, n_max)) / (p_outer - 1);
  const double q1 = std::pow(A_size, std::max(1.0, ctx.delta));
  out.g0 = gv[0];
  out.sum_e = sum_e;
  out.outer = outer;
  out.terms = int(std::min(d, n_max));
  out.value = q1 * (gv[0] * A_size * sum_e + outer);
  return out;
}

BoundCheck verify_bound(const std::vector<double>& exact, const std::vector<double>& bound,
                        double tol) {
  if (exact.size() != bound.size()) throw DomainError("verify_bound needs matching grids");
  BoundCheck c;
  c.ratio.resize(exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (bound[i] == 0.0)
      c.ratio[i] = exact[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
      c.ratio[i] = exact[i] / bound[i];
    c.max_ratio = std::max(c.max_ratio, c.ratio[i]);
    if (exact[i] > bound[i] + tol) c.violations.push_back(i);
  }
  return c;
}

}  // namespace lindstab
