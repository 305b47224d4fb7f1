#pragma once

#include "lindstab/bounds.hpp"
#include "lindstab/common.hpp"
#include "lindstab/lattice.hpp"
#include "lindstab/linalg.hpp"
#include "lindstab/model.hpp"

#include <string>
#include <vector>

namespace lindstab {

// ρ_AB on C^{dA} ⊗ C^{dB}, A the leading factor.
struct BipartiteState {
  Mat rho;
  Index dA = 1, dB = 1;

  Mat rho_A() const;
  Mat rho_B() const;
  Mat product() const;  // ρ_A ⊗ ρ_B
};

// Validates ρ (PSD, unit trace) and the split.
BipartiteState make_bipartite(Mat rho, Index dA, Index dB, double tol = 1e-9);
// ρ on `labels` reduced to A ∪ B and reordered so that A's factors lead. A ∩ B must be empty.
BipartiteState make_bipartite(const Mat& rho, const Region& labels, int local_dim, const Region& a,
                              const Region& b);

double von_neumann_entropy(const Mat& rho);  // natural log

// ‖ρ_AB − ρ_A ⊗ ρ_B‖₁
double trace_corr(const BipartiteState& s);

struct CovarianceResult {
  double value = 0.0;  // lower bound on the max
  Mat M, N;
};
// max over ‖M‖, ‖N‖ ≤ 1 of |tr[(M ⊗ N)(ρ_AB − ρ_A ⊗ ρ_B)]| by alternating polar steps.
CovarianceResult covariance_corr(const BipartiteState& s, int restarts = 32,
                                 std::uint64_t seed = 0xc0ffeeULL);

double mutual_info(const BipartiteState& s);

struct FannesCheck {
  bool applicable = false;  // T ≤ 1/(2e)
  double lhs = 0.0;         // I
  double rhs = 0.0;         // T (ln D_AB − ln T)
  bool holds = true;
};
FannesCheck fannes_check(const BipartiteState& s, double tol = 1e-12);

struct LtqoOptions {
  int restarts = 16;
  std::uint64_t seed = 0x17a0ULL;
  int max_iter = 100;
  double tol = 1e-12;
  // matrix-free path: Heisenberg/Schrödinger limits by time doubling
  double t_start = 8.0;
  double t_max = 1e4;
  double converge_tol = 1e-11;
};

struct LtqoResult {
  double value = 0.0;
  bool exact = false;  // classical simplex enumerated
  std::string method;  // "classical", "dense", "matrix-free"
};

// sup over periodic states ρ₁, ρ₂ of the generator of ‖Tr_{A^c}(ρ₁ − ρ₂)‖₁.
// Dense projectors up to Hilbert dimension 32; classical stationary sets are enumerated
// exactly, otherwise an alternating ascent over pure pairs gives a lower bound.
LtqoResult ltqo_delta(const SuperOp& L, const Region& labels, int local_dim, const Region& a,
                      const LtqoOptions& opt = {});
// Same on a model; above Hilbert dimension 32 the periodic projection is the long-time
// limit computed matrix-free (ConditioningError if it does not settle, e.g. rotating
// peripheral states).
LtqoResult ltqo_delta(const Model& m, const Region& a, const LtqoOptions& opt = {});
// On the truncation of `fam` to A(ℓ).
LtqoResult ltqo_delta(const UniformFamily& fam, const Geometry& g, const Region& a, int ell,
                      const LtqoOptions& opt = {});
// Classical generator Q (measure side, columns sum to zero) on configurations of `labels`
// in the canonical product order; exact over the stationary simplex.
LtqoResult ltqo_delta_classical(const RMat& Q, const Region& labels, int local_dim,
                                const Region& a);
// lim_{t→∞} exp(tQ) for Q on measures, by repeated squaring with the columns kept stochastic.
RMat classical_limit(const RMat& Q, double tol = 1e-13);

struct Indistinguishability {
  double lhs = 0.0;  // |tr O_A(ρ_∞ − ρ^s_∞)|
  double rhs = 0.0;  // ‖O_A‖ |A|^δ Δ₀(s)
};
// ρ_∞ from the closed generator on Λ and ρ^s_∞ from the closed generator on A(s).
Indistinguishability fixed_point_indistinguishability(const UniformFamily& fam, const Geometry& g,
                                                      const Region& lambda, const Region& a,
                                                      int s, const Mat& O_A,
                                                      const BoundContext& ctx);

struct DecayFit {
  enum class Class { exponential, power };
  Class cls = Class::exponential;
  double rate = 0.0;
  double log_prefactor = 0.0;
  double residual = 0.0;  // rms in log value
  double exp_residual = 0.0, power_residual = 0.0;
};
std::string to_string(DecayFit::Class c);

// Least squares of log y against x (exponential) and log(1 + x) (power); the smaller
// residual wins. Values ≤ floor are dropped; DomainError with fewer than 4 points left.
DecayFit decay_fit(const std::vector<double>& x, const std::vector<double>& y,
                   double floor = 1e-15);

}  // namespace lindstab
