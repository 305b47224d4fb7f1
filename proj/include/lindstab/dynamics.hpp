#pragma once

#include "lindstab/common.hpp"
#include "lindstab/lattice.hpp"
#include "lindstab/linalg.hpp"

#include <functional>
#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

namespace lindstab {

// Scaling and squaring with a degree-13 Padé approximant.
Mat expm(const Mat& A);
SuperOp expm(const SuperOp& L, double t);

// exp(t A) v for a linear map given only through its action; `norm1` bounds ‖A‖₁.
// Truncated Taylor series on substeps chosen from the norm.
Vec expm_action(const std::function<Vec(const Vec&)>& A, double norm1, const Vec& v, double t,
                double tol = 1e-14);

class Semigroup {
 public:
  explicit Semigroup(SuperOp generator);

  const SuperOp& generator() const { return L_; }
  // exp(tL), cached by t.
  SuperOp propagator(double t) const;
  Mat evolve(double t, const Mat& rho) const;
  Mat heisenberg(double t, const Mat& O) const;

 private:
  SuperOp L_;
  mutable std::shared_mutex mu_;
  mutable std::map<double, std::shared_ptr<const SuperOp>> cache_;
};

struct AsymptoticProjectors {
  SuperOp stationary;  // T_∞
  SuperOp peripheral;  // T_φ
  std::vector<double> frequencies;  // imaginary parts of the peripheral eigenvalues
  Index stationary_dim = 0;
  double tol = 0.0;
};

// Classification: |λ| < tol·‖L‖ is zero, Re λ > −tol·‖L‖ is peripheral.
AsymptoticProjectors asymptotic_projectors(const SuperOp& L, double tol = 1e-9);

// Dimension of ker L (rank-revealing LU).
Index stationary_dimension(const SuperOp& L, double tol = 1e-9);

// The unique normalized fixed point; UniquenessError if ker L is not one-dimensional.
Mat fixed_point(const SuperOp& L);

double spectral_gap(const SuperOp& L, double tol = 1e-9);

struct ContractionEstimate {
  double value = 0.0;
  Mat maximizer;  // pure state ψψ†
  int restarts = 0;
};

struct ContractionOptions {
  int restarts = 64;
  std::uint64_t seed = 0x5eedULL;
  double tol = 1e-12;
  int max_iter = 200;
  bool grid = true;  // exhaustive grid refinement when the input dimension is ≤ 4
};

// ½ sup_ψ ‖Δ(ψψ†)‖₁ for a Hermiticity-preserving map Δ given as a (dout²)×(din²) matrix.
ContractionEstimate max_half_trace_norm(const Mat& delta, Index din, Index dout,
                                        const ContractionOptions& opt = {});

// η(T_t) = ½ sup ‖T_t(ρ) − T_t∘T_φ(ρ)‖₁.
ContractionEstimate contraction(const Semigroup& g, const AsymptoticProjectors& P, double t,
                                const ContractionOptions& opt = {});
ContractionEstimate contraction(const SuperOp& L, double t, const ContractionOptions& opt = {});

// ½ sup ‖Tr_{A^c}(T_t(ρ) − T_t∘T_φ(ρ))‖₁ with the system living on `labels`.
ContractionEstimate local_contraction(const Semigroup& g, const AsymptoticProjectors& P, double t,
                                      const Region& labels, int local_dim, const Region& a,
                                      const ContractionOptions& opt = {});

// Matrix of Tr_{A^c} as a map from operators on `labels` to operators on `a`.
Mat partial_trace_map(const Region& labels, int local_dim, const Region& a);

struct MixingOptions {
  double t_max = 200.0;
  int grid_points = 40;
  int bisection_steps = 30;
  ContractionOptions contraction;
};

// Smallest t with η(T_t) ≤ eps; HorizonError if not reached by t_max.
double mixing_time(const SuperOp& L, double eps = 0.25, const MixingOptions& opt = {});

struct GrmSample {
  double size = 1.0;  // |Λ|
  double t = 0.0;
  double eta = 0.0;
};

struct GrmFit {
  double gamma = 0.0;
  double delta = 0.0;
  double log_prefactor = 0.0;
  double residual = 0.0;       // rms in log η
  double max_violation = 0.0;  // max of η − exp(c)|Λ|^δ e^{−γt}, positive when above the fit
  bool non_mixing = false;
  std::vector<GrmSample> samples;
};

// Least squares log η = c + δ log|Λ| − γ t over samples with η above `floor`.
GrmFit fit_grm(const std::vector<GrmSample>& samples, double floor = 1e-12);
// Runs contraction on the family generators (size → (|Λ|, L)) on the t grid, then fits.
GrmFit fit_grm(const std::function<std::pair<double, SuperOp>(int)>& family,
               const std::vector<int>& sizes, const std::vector<double>& t_grid,
               const ContractionOptions& opt = {});

}  // namespace lindstab
