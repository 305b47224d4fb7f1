#pragma once

#include "lindstab/bounds.hpp"
#include "lindstab/dynamics.hpp"
#include "lindstab/io.hpp"
#include "lindstab/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lindstab {

struct Assertion {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  CsvTable table{{"empty"}};
  json summary = json::object();
  std::vector<Assertion> assertions;

  bool passed() const;
  void check(std::string name, bool ok, std::string detail = "");
  // summary plus {"assertions": [...], "passed": bool}
  json report() const;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  int threads = 1;
};

// Runs fn(i) for i < n on up to `threads` workers; results must be written by index.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// max_r of Σ (cb-norm upper bounds of the bulk terms at u with radius r) / f(r).
double family_strength_upper(const UniformFamily& fam, const Site& u, int max_radius);

struct BoundSeries {
  std::vector<double> t, exact, bound;
  BoundCheck check;
};

// ‖K(O(t))‖ against bound_lr with C = min(|X|, |Y|); K acts on Y and K_norm bounds its
// cb ∞→∞ norm.
BoundSeries lr_check(const Model& m, const BoundContext& ctx, const Region& x, const Mat& O_x,
                     const Region& y, const SuperOp& K, double K_norm,
                     const std::vector<double>& t_grid);
// ‖O_A(t) − O_r(t)‖ against bound_localization, O_r evolving under the truncation of `fam`
// to A(r) on the same labels as m.
BoundSeries localization_check(const Model& m, const UniformFamily& fam, const BoundContext& ctx,
                               const Region& a, const Mat& O_a, int r,
                               const std::vector<double>& t_grid);

struct SubadditivityRow {
  double t = 0.0;
  double eta_sum = 0.0;
  double eta_parts = 0.0;  // Σ_j η(exp(t L_j))
};
// Single-site generators L_j placed on sites 0..k−1 (so they commute); η of the sum against
// the sum of the single-site contractions.
std::vector<SubadditivityRow> commuting_subadditivity(const std::vector<SuperOp>& sites,
                                                      const std::vector<double>& t_grid,
                                                      const ContractionOptions& opt = {});

// `t` values spaced evenly in log between lo and hi.
std::vector<double> log_grid(double lo, double hi, int n);

// Config fields: "experiment" (spectrum, contraction, grm-fit, stability, lr-verify,
// localization-verify, ltqo, correlations, glauber, preset) plus experiment-specific fields;
// "seed" (default 1) is overridden by opt.seed; "expect": {"key": [lo, hi]} adds range
// assertions on numeric summary values. ConfigError on schema problems.
ExperimentResult run_experiment(const json& config, const RunOptions& opt);
ExperimentResult run_preset(const std::string& name, const RunOptions& opt);
const std::vector<std::string>& preset_names();

}  // namespace lindstab
