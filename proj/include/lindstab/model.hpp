#pragma once

#include "lindstab/common.hpp"
#include "lindstab/lattice.hpp"
#include "lindstab/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lindstab {

struct DecayProfile {
  enum class Kind { finite_range, exponential, quasi_local, power };
  Kind kind = Kind::finite_range;
  // R for finite range, μ_f for exponential, a in exp(−a√r) for quasi-local, α for power.
  double param = 0.0;

  static DecayProfile finite_range(int R) { return {Kind::finite_range, double(R)}; }
  static DecayProfile exponential(double mu) { return {Kind::exponential, mu}; }
  static DecayProfile quasi_local(double a) { return {Kind::quasi_local, a}; }
  static DecayProfile power(double alpha) { return {Kind::power, alpha}; }

  // f(r) with f(0) = 1.
  double operator()(double r) const;
};

std::string to_string(DecayProfile::Kind k);

// One L_u(r). The generator acts on the tensor product of `support`, in that order.
// Support sites are lattice coordinates; on periodic geometries they are wrapped
// when the term is placed.
struct LocalTerm {
  Site center;
  int radius = 0;
  std::vector<Site> support;
  SuperOp generator;
  bool perturbation_only = false;
};

// A generator on region Λ given as a list of local terms. Tensor factors follow the
// canonical site order of `region`.
struct Model {
  Geometry geometry;
  Region region;
  int local_dim = 2;
  std::vector<LocalTerm> terms;

  Index hilbert_dim() const;
};

// Dense d_Λ²×d_Λ² matrix of Σ terms. Throws ResourceError above the dense ceiling.
SuperOp generator(const Model& m);
// L(X) and L†(X) without forming the global superoperator.
Mat apply_generator(const Model& m, const Mat& X);
Mat apply_generator_dual(const Model& m, const Mat& X);

// A local superoperator on `support` lifted to all of `region`.
SuperOp embed_superop(const SuperOp& local, const std::vector<Site>& support, const Region& region,
                      int local_dim);
Mat apply_local(const SuperOp& local, const std::vector<Site>& support, const Region& region,
                int local_dim, const Mat& X);

enum class BoundaryRule { open, periodic, custom };

struct UniformFamily {
  std::string name;
  int local_dim = 2;
  double J = 1.0;
  DecayProfile profile;
  // Terms L_u(r) centered at u, in unwrapped lattice coordinates.
  std::function<std::vector<LocalTerm>(const Site& u)> bulk;
  BoundaryRule boundary = BoundaryRule::open;
  // For BoundaryRule::custom: the boundary terms for Λ.
  std::function<std::vector<LocalTerm>(const Geometry&, const Region&)> custom_boundary;
};

// L_Λ: the bulk terms whose ball b_u(r) (clipped to the geometry) and support lie in Λ.
Model build_open(const UniformFamily& fam, const Geometry& g, const Region& lambda);
SuperOp assemble_open(const UniformFamily& fam, const Geometry& g, const Region& lambda);
Model truncate(const UniformFamily& fam, const Geometry& g, const Region& a);

struct BoundaryTerm {
  int depth = 0;  // smallest d with support ⊆ ∂_dΛ
  LocalTerm term;
};

// Terms of L^{∂Λ}. For the periodic rule Λ must be a box; the closed generator is the
// wrap-around sum on the torus of the box extents and the boundary condition is its
// difference from L_Λ.
std::vector<BoundaryTerm> boundary_condition(const UniformFamily& fam, const Geometry& g,
                                             const Region& lambda);
Model build_closed(const UniformFamily& fam, const Geometry& g, const Region& lambda);
SuperOp assemble_closed(const UniformFamily& fam, const Geometry& g, const Region& lambda);

struct BoundaryAudit {
  int depth = 0;
  double norm_bound = 0.0;  // Σ of local diamond-norm estimates of the terms at this depth
  double budget = 0.0;      // J |∂_dΛ| f(d)
  bool ok = true;
};
std::vector<BoundaryAudit> audit_boundary(const UniformFamily& fam, const Geometry& g,
                                          const Region& lambda);

struct Perturbation {
  std::vector<LocalTerm> terms;
  double epsilon = 0.0;
  DecayProfile profile;
};

struct PerturbedGenerator {
  SuperOp generator;
  std::vector<std::string> warnings;
};

// base + ε Σ E_u(r). Throws ValidationError if some E fails dual(E)(1) = 0. With
// probe_contractivity the semigroup exp(t(base + εE)) is checked for complete
// positivity and trace preservation at t ∈ {0.1, 1, 10}; failures become warnings.
PerturbedGenerator apply_perturbation(const Model& base, const Perturbation& p,
                                      bool probe_contractivity = false);
Model perturbed_model(const Model& base, const Perturbation& p);

struct StrengthEstimate {
  double J = 0.0;
  DecayProfile profile;
  std::vector<double> f;  // sampled f(r), r = 0..sample_radius
  double residual = 0.0;
};

StrengthEstimate strength_estimate(const UniformFamily& fam, const Site& sample_site,
                                   int sample_radius, const EstimatorOptions& opt = {});

}  // namespace lindstab
