#pragma once

#include "lindstab/common.hpp"
#include "lindstab/model.hpp"

#include <string>
#include <vector>

namespace lindstab {

enum class ExampleId { amplitude_damping, four_level, appendix_chain };
std::string to_string(ExampleId id);
ExampleId example_from_string(const std::string& s);

enum class FourLevelVariant { base, plus_E, plus_E_dagger };
enum class AppendixVariant { classical, embedded, embedded_without_third };
std::string to_string(FourLevelVariant v);
std::string to_string(AppendixVariant v);

struct ExamplePair {
  Model base, perturbed;
};

// N sites each with jump |0><1|; the perturbed copy uses the rotated jump |α₀><α₁| with
// α₀ = (√(1−ε²), ε), α₁ = (−ε, √(1−ε²)), whose fixed point is |α₀>^⊗N.
ExamplePair amplitude_damping(int N, double epsilon);
Vec alpha0(double epsilon);

// 4-level sites with jumps |0><1|, |0><3|, |2><1|, |2><3| on each site. plus_E adds the
// per-site jump √(2/N)|0><2|; plus_E_dagger the mirrored jump √(2/N)|2><0| (the Heisenberg
// dual of the added dissipator is not trace preserving).
Model four_level(int N, FourLevelVariant v);
SuperOp four_level_site();

// 2N spins on a ring, pairs (2i, 2i+1). Pair i hops by the rates of Q_c, Q_r (right
// neighbour 2i+2 equal to 0) and Q_l (left neighbour 2i−1 equal to 1) in the pair order
// (|10>, |00>, |11>, |01>). Embedded variants place the two-site jumps on bonds (k, k+1)
// plus single-site dephasing at rate γ.
Model appendix_chain(int N, AppendixVariant v, double gamma = 1.0);
// Q^{2N} on measures in the binary spin order (site 0 most significant); dense, so N ≤ 6.
RMat appendix_generator(int N);
// perm[p] = binary index of the configuration at position p of the pair order.
std::vector<Index> appendix_pair_order(int N);
// Binary index of the configuration repeating `pair` (e.g. "01") N times.
Index appendix_configuration(int N, const std::string& pair);
// Largest shortest-path distance between configurations connected in the transition graph.
int transition_graph_diameter(const RMat& Q);

struct ExampleHandle {
  ExampleId id = ExampleId::amplitude_damping;
  int N = 2;
  double epsilon = 0.1;
  double gamma = 1.0;
  FourLevelVariant four = FourLevelVariant::base;
  AppendixVariant appendix = AppendixVariant::embedded;
};
// The model the handle describes (for amplitude damping, the perturbed one when ε ≠ 0).
Model expand(const ExampleHandle& h);

struct DeviationPoint {
  double t = 0.0;
  double value = 0.0;
};
struct DeviationSeries {
  std::vector<DeviationPoint> points;
  double sup = 0.0;
};
// ‖O₀(t) − O₁(t)‖ (operator norm) for Heisenberg evolutions of O_A ⊗ 1 under both models,
// computed matrix-free. An infinite grid point means the t → ∞ limit. DomainError unless
// both models share their labels and A lies inside them.
DeviationSeries observable_deviation(const Model& base, const Model& perturbed, const Mat& O_A,
                                     const Region& a, const std::vector<double>& t_grid);
// exp(t L†)(X) computed matrix-free.
Mat heisenberg_evolve(const Model& m, const Mat& X, double t);
// lim_{t→∞} of the Heisenberg evolution of X by time doubling (ConditioningError if it
// does not settle by t_max).
Mat heisenberg_limit(const Model& m, const Mat& X, double t_start = 8.0, double t_max = 1e5,
                     double tol = 1e-11);

}  // namespace lindstab
