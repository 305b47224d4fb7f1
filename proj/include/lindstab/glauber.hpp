#pragma once

#include "lindstab/common.hpp"
#include "lindstab/dynamics.hpp"
#include "lindstab/lattice.hpp"
#include "lindstab/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lindstab {

// Spins σ(x) ∈ {+1, −1} stored as digits 0 ↔ +1, 1 ↔ −1. A configuration of a region is an
// index whose digits follow the canonical site order, first site most significant (the
// tensor-product order of the embedded model).

struct PotentialTerm {
  std::vector<Site> sites;    // offsets from the origin when translation-invariant
  std::vector<double> table;  // J_A on the 2^|sites| local configurations
};

struct Potential {
  int range = 1;
  std::vector<PotentialTerm> terms;
  bool translation_invariant = true;
};

// J_A = J σ_x σ_{x+e_k} on every nearest-neighbour bond plus h σ_x; β is absorbed into J and h.
Potential ising_potential(int D, double J, double h = 0.0);
// Validates table sizes and the range (DomainError).
void validate(const Potential& pot);

// One term J_A placed on the lattice, with A given as positions in the geometry's site list.
struct PotentialInstance {
  std::vector<int> sites;
  const std::vector<double>* table = nullptr;
};

enum class RateFamily { heat_bath, metropolis, custom };
std::string to_string(RateFamily f);

// Full spin configuration on the geometry, one digit per site of all_sites().
using Spins = std::vector<int>;
using CustomRate = std::function<double(int x, const Spins& s)>;

class GlauberRates {
 public:
  // Instances are the translates of each term lying inside the geometry (wrapped on periodic
  // axes); there is no spin outside the geometry. DomainError if a custom rate is not
  // positive somewhere.
  GlauberRates(RateFamily family, Potential pot, Geometry g, CustomRate custom = {});

  RateFamily family() const { return family_; }
  const Potential& potential() const { return pot_; }
  const Geometry& geometry() const { return g_; }
  const Region& sites() const { return all_; }
  const std::vector<PotentialInstance>& instances() const { return inst_; }
  // Union of the instances containing site x (x included).
  const std::vector<int>& neighbourhood(int x) const { return nbhd_[x]; }

  // h_x(σ) = Σ_{A ∋ x} J_A(σ)
  double local_coupling(int x, const Spins& s) const;
  // ΔH_x(σ) = H(σ^x) − H(σ)
  double energy_change(int x, const Spins& s) const;
  double rate(int x, const Spins& s) const;

  // bounds over every site and neighbourhood configuration
  double c_min() const { return cmin_; }
  double c_max() const { return cmax_; }

 private:
  RateFamily family_;
  Potential pot_;
  Geometry g_;
  Region all_;
  CustomRate custom_;
  std::vector<PotentialInstance> inst_;
  std::vector<std::vector<int>> by_site_;
  std::vector<std::vector<int>> nbhd_;
  double cmin_ = 0.0, cmax_ = 0.0;
};

// max over x and neighbourhood configurations of
// |e^{h_x(σ)} c(x,σ) − e^{h_x(σ^x)} c(x,σ^x)| / max of the two terms, i.e. detailed balance
// against μ ∝ e^{−H}.
double rates_detailed_balance_residual(const GlauberRates& rates);

// Spins of the geometry outside Λ within distance r (the sites H^τ_Λ reads).
Region spin_boundary(const GlauberRates& rates, const Region& lambda);

// Configuration space of a region, guarded by an enumeration ceiling of 2^20.
Index configuration_count(const Region& r);
// Writes the digits of configuration `index` of region `r` into the full configuration.
void write_configuration(const GlauberRates& rates, const Region& r, Index index, Spins& s);

// H^τ_Λ(σ) = −Σ_{A ∩ Λ ≠ ∅} J_A(σ × τ); τ indexes configurations of spin_boundary(Λ).
double energy(const GlauberRates& rates, const Region& lambda, Index sigma, Index tau);
// μ^τ_Λ over configurations of Λ.
std::vector<double> gibbs(const GlauberRates& rates, const Region& lambda, Index tau);

// Q on measures (column σ holds the jump rates out of σ; columns sum to zero). The function
// side of Q_Λ is the transpose.
struct ClassicalGenerator {
  Region lambda;
  Index tau = 0;
  RMat matrix;
};
ClassicalGenerator classical_generator(const GlauberRates& rates, const Region& lambda, Index tau);
// Same chain on Λ ∪ ∂Λ with the boundary spins frozen, so every τ is represented.
RMat classical_generator_frozen(const GlauberRates& rates, const Region& lambda);

// Quantum embedding on Λ with boundary τ: one term per x ∈ Λ with jumps √c(x,η)|η^x><η| over
// the configurations η of b_x(r) ∩ Λ, plus single-site dephasing at rate γ (omitted for
// γ = 0).
Model embed(const GlauberRates& rates, const Region& lambda, Index tau, double gamma);
// Embedding on Λ ∪ ∂Λ with the boundary spins kept as frozen quantum labels; jumps and
// dephasing act on Λ only.
Model embed_frozen(const GlauberRates& rates, const Region& lambda, double gamma);
// The dephasing part alone on the same labels as `m`, on the sites of `lambda`.
Model dephasing_part(const Model& m, const Region& lambda, double gamma);

// max over basis states σ of |exp(tL)(|σ><σ|) − diag(exp(tQ) e_σ)| entrywise.
double embedding_residual(const Model& m, const RMat& Q, double t);

// ‖L∘Γ_μ − Γ_μ∘L†‖ (largest singular value) with Γ_μ the Schur multiplier √μ(η₁)μ(η₂).
// This is the ordering under which classical detailed balance μ(σ)c(x,σ) = μ(σ^x)c(x,σ^x)
// gives zero; the reversed ordering Γ_μ∘L = L†∘Γ_μ holds for balance against 1/μ instead.
// DomainError unless μ > 0 everywhere.
double detailed_balance_residual(const SuperOp& L, const std::vector<double>& mu);

struct FixedPointReport {
  Index stationary_dim = 0;
  Index gibbs_count = 0;  // boundary configurations
  double max_offdiagonal = 0.0;  // largest off-diagonal entry in the stationary range
  double gibbs_residual = 0.0;   // max_τ ‖T_φ(ω_τ) − ω_τ‖₁
  // upper bound on the trace-norm Hausdorff distance between the stationary states and
  // conv{ω_τ}, where ω_τ = μ^τ ⊗ |τ><τ|
  double hausdorff_bound = 0.0;
};
// Stationary set of embed_frozen(rates, Λ, γ) against the enumerated Gibbs simplex.
FixedPointReport fixed_point_set(const GlauberRates& rates, const Region& lambda, double gamma);

struct SplitRow {
  double t = 0.0;
  double eta_total = 0.0;      // η(T_t)
  double eta_classical = 0.0;  // η(T_t∘C), exact over the simplex
  double eta_classical_estimate = 0.0;
  double eta_dephasing = 0.0;  // η(exp(tD))
  double dephasing_envelope = 0.0;  // |Λ| e^{−γt/2}
  bool holds = true;           // η(T_t) ≤ η(T_t∘C) + η(exp(tD)) + slack
};
struct SplitReport {
  std::vector<SplitRow> rows;
  int violations = 0;
  int envelope_violations = 0;
};
SplitReport contraction_split_check(const GlauberRates& rates, const Region& lambda, Index tau,
                                    double gamma, const std::vector<double>& t_grid,
                                    const ContractionOptions& opt = {}, double slack = 1e-8);

// sup_{τ,τ'} ‖μ^τ_{V,Δ} − μ^{τ'}_{V,Δ}‖₁ by enumeration of V and its boundary.
double weak_mixing_sup(const GlauberRates& rates, const Region& V, const Region& delta);

// e(x, σ) added to the rates (not required to satisfy detailed balance).
using RatePerturbation = std::function<double(int x, const Spins& s)>;

struct DeviationRow {
  double t = 0.0;
  double deviation = 0.0;  // ‖T_t f − S_t f‖_∞
};
struct PerturbedRatesResult {
  double E = 0.0;  // sup |e|
  std::vector<DeviationRow> rows;
  double max_deviation = 0.0;
};
// Exact classical evolutions of f (a function on configurations of Λ) under Q and Q + E.
// DomainError if c + e < 0 somewhere.
PerturbedRatesResult perturbed_rates_experiment(const GlauberRates& rates,
                                                const RatePerturbation& e, const Region& lambda,
                                                Index tau, const RVec& f,
                                                const std::vector<double>& t_grid);

}  // namespace lindstab
