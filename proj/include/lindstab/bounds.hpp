#pragma once

#include "lindstab/common.hpp"
#include "lindstab/model.hpp"

#include <string>
#include <vector>

namespace lindstab {

enum class LRClass { exponential, power };  // ν_μ(r) = e^{μr} or (1+r)^μ

std::string to_string(LRClass c);

struct LRData {
  LRClass cls = LRClass::exponential;
  double mu = 1.0;
  double v = 0.0;
};

double nu(LRClass cls, double mu, double r);
inline double nu(const LRData& lr, double r) { return nu(lr.cls, lr.mu, r); }

// v = 2J Σ_{r≥0} |b₀(r)∖b₀(r−1)| Σ_{δ≥r} f(δ) ν_μ(δ) |b₀(δ)| on Z^D with the sup-metric balls.
// Infinite tails are summed until a certified tail bound is below 1e−12 of the partial
// sum; if the cap is hit first the bound is added, so v is always an upper value.
// DivergenceError when the series diverges.
double lr_velocity(double J, const DecayProfile& f, int D, LRClass cls, double mu);

// α − 3D for α ≥ 5D − 1, else (α − D − 1)/2. DomainError unless α > 2D + 1.
double beta_exponent(double alpha, int D);

struct BoundContext {
  int D = 1;
  double J = 1.0;
  DecayProfile profile;
  LRData lr;
  double gamma = 1.0;  // GRM rate
  double delta = 1.0;  // GRM size exponent
  double beta = 0.5;   // localization decay exponent
};

// Fills v from lr_velocity and β from beta_exponent (power-law profile with power class)
// or μ/2 otherwise.
BoundContext make_context(int D, double J, const DecayProfile& profile, LRClass cls, double mu,
                          double gamma, double delta);

struct CompatReport {
  bool cc1 = false;  // α > 3D + 2
  bool cc2 = false;  // β > (v/γ)(v + γ + Dδ)
  bool cc3 = false;  // β ≥ v + γ − Dδ
  double k_bar = 0.0;
  double delta0 = 0.0;
  double gamma_tilde = 0.0;
  // γ̃μ/(γ̃ − v), defined when γ̃ > v.
  double epsilon_tilde = 0.0;
  bool epsilon_tilde_defined = false;
  // sup_k min(μ − vk, γ̃k) = γ̃μ/(v + γ̃), the value the optimization actually attains.
  double epsilon_opt = 0.0;
  bool all() const { return cc1 && cc2 && cc3; }
};

CompatReport compat_check(const BoundContext& ctx);

// ‖O‖|A|J (e^{vt} − 1 − vt)/v · ν_β^{-1}(r)
double bound_localization(const BoundContext& ctx, double A_size, double O_norm, double t,
                          double r);
// ‖K‖‖O‖C (e^{vt} − 1)/ν_μ(dist)
double bound_lr(const BoundContext& ctx, double K_norm, double O_norm, double C, double t,
                double dist);

// Δ₀(s) = (J/v) e^{vt(s)} ν_β^{-1}(s) + p(s) e^{−γ t(s)} with p(s) = (1 + 2s)^{Dδ}.
// Exponential class: t(s) = βs/(2v). Power class: t(s) = k̄ log(1 + s), which requires
// the compatibility conditions (InfeasibilityError otherwise).
double delta0_time(const BoundContext& ctx, double s);
double delta0_envelope(const BoundContext& ctx, double s);

// c(|A|) for a perturbation with profile e. Exponential class uses
// t₀(δ) = (μ/2)(log v / v)δ and g̃(δ) = e^{−μδ/2} + e^{−γ t₀(δ)}/γ; power class uses
// t₀(δ) = k̃ log(1 + δ), k̃ = μ/(γ̃ − v). InfeasibilityError when t₀ is not increasing
// or the outer series does not converge. finite_range(−1) is the zero perturbation.
struct StabilityEnvelope {
  double value = 0.0;
  double g0 = 0.0;
  double sum_e = 0.0;
  double outer = 0.0;  // Σ_{d>0} q(d)(e⋆g̃(d) + g̃(0) Σ_{r>d} e(r))
  int terms = 0;
};
double stability_gtilde(const BoundContext& ctx, double delta);
StabilityEnvelope stability_envelope(const BoundContext& ctx, double A_size,
                                     const DecayProfile& e);

struct BoundCheck {
  std::vector<double> ratio;  // exact/bound, 0 where both vanish
  double max_ratio = 0.0;
  std::vector<std::size_t> violations;  // exact > bound + tol
};

BoundCheck verify_bound(const std::vector<double>& exact, const std::vector<double>& bound,
                        double tol = 1e-9);

}  // namespace lindstab
