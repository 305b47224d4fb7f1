#include "lindstab/experiments.hpp"

#include "lindstab/correlations.hpp"
#include "lindstab/glauber.hpp"
#include "lindstab/zoo.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

namespace lindstab {

namespace {

std::string hash_hex(const Mat& M) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(M.data());
  for (std::size_t i = 0; i < std::size_t(M.size()) * sizeof(cplx); ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> read_grid(const json& cfg, const char* key, std::vector<double> fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& g = cfg[key];
  const std::string where = std::string("/") + key;
  if (!g.is_array() || g.empty()) throw ConfigError("expected a non-empty array", where);
  std::vector<double> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].is_number()) out.push_back(g[i].get<double>());
    else if (g[i] == "inf") out.push_back(INFINITY);
    else throw ConfigError("grid entries must be numbers or \"inf\"", where + "/" + std::to_string(i));
    if (out.back() < 0) throw ConfigError("grid entries must be nonnegative", where + "/" + std::to_string(i));
  }
  return out;
}

template <class T>
T field(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value: ") + e.what(), std::string("/") + key);
  }
}

const json& required(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("missing field '") + key + "'", std::string("/") + key);
  return cfg[key];
}

template <class F>
auto nested(const char* key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), std::string("/") + key + e.field, e.line);
  }
}

Model model_field(const json& cfg, std::uint64_t seed, const char* key = "model") {
  return nested(key, [&] { return model_from_json(required(cfg, key), seed); });
}

Mat pauli_like(int d) {
  Mat Z = Mat::Identity(d, d);
  for (int k = 1; k < d; k += 2) Z(k, k) = -1;
  return Z;
}

Region first_site(const Model& m) { return Region(std::vector<Site>{m.region[0]}); }

ContractionOptions contraction_options(const json& cfg, std::uint64_t seed) {
  ContractionOptions o;
  o.restarts = field(cfg, "restarts", o.restarts);
  o.seed = derive_seed(seed, 1);
  if (o.restarts < 1) throw ConfigError("restarts must be positive", "/restarts");
  return o;
}

// least squares y = a x through the origin; relative rms residual
std::pair<double, double> fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  double xy = 0, xx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
  }
  const double a = xy / xx;
  double r = 0;
  for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(y[i] - a * x[i]) / std::abs(a * x[i]));
  return {a, r};
}

ExperimentResult spectrum(const json& cfg, std::uint64_t seed) {
  const Model m = model_field(cfg, seed);
  const SuperOp L = generator(m);
  Eigen::ComplexEigenSolver<Mat> es(L.matrix, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag();
  });
  ExperimentResult r;
  r.table = CsvTable({"index", "re", "im"});
  for (std::size_t i = 0; i < ev.size(); ++i) r.table.add({(long long)i, ev[i].real(), ev[i].imag()});
  r.summary["stationary_dim"] = stationary_dimension(L);
  try {
    r.summary["gap"] = spectral_gap(L);
  } catch (const DegenerateSpectrumError&) {
    r.summary["gap"] = nullptr;
  }
  const LindbladReport v = is_valid_lindbladian(L);
  r.check("valid_lindbladian", v.overall);
  return r;
}

ExperimentResult contraction_run(const json& cfg, std::uint64_t seed, int threads) {
  const Model m = model_field(cfg, seed);
  const std::vector<double> grid = read_grid(cfg, "t_grid", {0.5, 1, 2, 4, 8});
  const ContractionOptions opt = contraction_options(cfg, seed);
  const Semigroup g(generator(m));
  const AsymptoticProjectors P = asymptotic_projectors(g.generator());
  std::vector<ContractionEstimate> est(grid.size());
  parallel_for(int(grid.size()), threads, [&](int i) { est[i] = contraction(g, P, grid[i], opt); });
  ExperimentResult r;
  r.table = CsvTable({"t", "value", "maximizer_hash"});
  bool bounded = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    r.table.add({grid[i], est[i].value, hash_hex(est[i].maximizer)});
    bounded = bounded && est[i].value >= 0 && est[i].value <= 1 + 1e-9;
  }
  r.summary["stationary_dim"] = P.stationary_dim;
  r.check("contraction_in_unit_interval", bounded);
  return r;
}

ExperimentResult grm_fit_run(const json& cfg, std::uint64_t seed) {
  const UniformFamily fam0 = nested("family", [&] { return family_from_json(required(cfg, "family"), seed); });
  const auto sizes = field(cfg, "sizes", std::vector<int>{1, 2, 3});
  const std::vector<double> grid = read_grid(cfg, "t_grid", {1, 2, 4, 8});
  const bool periodic = field(cfg, "boundary", std::string("open")) == "periodic";
  for (int n : sizes)
    if (n < 1) throw ConfigError("sizes must be positive", "/sizes");
  UniformFamily fam = fam0;
  if (periodic) fam.boundary = BoundaryRule::periodic;
  auto family = [&](int n) {
    const Geometry g = Geometry::chain(n, periodic);
    const Region all = full_region(g);
    return std::make_pair(double(n), periodic ? assemble_closed(fam, g, all) : assemble_open(fam, g, all));
  };
  const GrmFit fit = fit_grm(family, sizes, grid, contraction_options(cfg, seed));
  ExperimentResult r;
  r.table = CsvTable({"size", "t", "eta"});
  bool bounded = true;
  for (const GrmSample& s : fit.samples) {
    r.table.add({s.size, s.t, s.eta});
    bounded = bounded && s.eta <= 1 + 1e-9;
  }
  r.summary["gamma"] = fit.gamma;
  r.summary["delta"] = fit.delta;
  r.summary["log_prefactor"] = fit.log_prefactor;
  r.summary["residual"] = fit.residual;
  r.summary["max_violation"] = fit.max_violation;
  r.summary["non_mixing"] = fit.non_mixing;
  r.check("contraction_in_unit_interval", bounded);
  return r;
}

ExperimentResult stability_run(const json& cfg, std::uint64_t seed) {
  if (!cfg.contains("model") || !cfg["model"].contains("perturbation"))
    throw ConfigError("stability needs a model with a perturbation", "/model/perturbation");
  json base_cfg = cfg["model"];
  base_cfg.erase("perturbation");
  const Model base = nested("model", [&] { return model_from_json(base_cfg, seed); });
  const Model pert = model_field(cfg, seed);
  const Region a = cfg.contains("support") ? field(cfg, "support", Region{}) : first_site(base);
  Mat O = basis_projector(base.local_dim, 0);
  if (cfg.contains("observable")) O = nested("observable", [&] { return matrix_from_json(cfg["observable"]); });
  const std::vector<double> grid = read_grid(cfg, "t_grid", {0.5, 1, 2, 4, 8});
  DeviationSeries s;
  try {
    s = observable_deviation(base, pert, O, a, grid);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "/support");
  }
  ExperimentResult r;
  r.table = CsvTable({"t", "deviation"});
  for (const DeviationPoint& p : s.points) r.table.add({p.t, p.value});
  r.summary["sup"] = s.sup;
  r.check("deviation_finite", std::isfinite(s.sup));
  return r;
}

struct LrSetup {
  UniformFamily fam;
  Model m;
  BoundContext ctx;
};

LrSetup lr_setup(const json& cfg, std::uint64_t seed) {
  LrSetup s;
  const json& mj = required(cfg, "model");
  s.fam = nested("model", [&] { return family_from_json(required(mj, "family"), seed); });
  if (s.fam.profile.kind != DecayProfile::Kind::finite_range)
    throw ConfigError("bound checks need a finite-range family", "/model/family");
  s.m = model_field(cfg, seed);
  if (s.m.region.empty()) throw ConfigError("empty region", "/model/region");
  const double mu = field(cfg, "mu", 1.0);
  if (!(mu > 0)) throw ConfigError("mu must be positive", "/mu");
  const double J = family_strength_upper(s.fam, s.m.region[0], int(s.fam.profile.param));
  s.ctx = make_context(s.m.geometry.dim, J, s.fam.profile, LRClass::exponential, mu, 1.0, 1.0);
  return s;
}

json context_json(const BoundContext& c) {
  return json{{"D", c.D}, {"J", c.J}, {"v", c.lr.v}, {"mu", c.lr.mu}, {"beta", c.beta}};
}

ExperimentResult lr_run(const json& cfg, std::uint64_t seed) {
  const LrSetup s = lr_setup(cfg, seed);
  const int d = s.m.local_dim;
  const Region x = cfg.contains("x") ? Region({field(cfg, "x", Site{})}) : first_site(s.m);
  const auto dists = field(cfg, "dists", std::vector<int>{2, 3});
  const std::vector<double> grid = read_grid(cfg, "t_grid", {0.5, 1, 2, 3, 4, 5});
  const Mat Z = pauli_like(d);
  const SuperOp K = identity_map(d) - sandwich(Z, Z);
  ExperimentResult r;
  r.table = CsvTable({"dist", "t", "exact", "bound", "ratio"});
  std::size_t violations = 0;
  for (int dist : dists) {
    Site y = x[0];
    y[0] += dist;
    if (!s.m.region.contains(y)) throw ConfigError("K site outside the model", "/dists");
    const BoundSeries b = lr_check(s.m, s.ctx, x, Z, Region({y}), K, 2.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) r.table.add({(long long)dist, grid[i], b.exact[i], b.bound[i], b.check.ratio[i]});
    violations += b.check.violations.size();
  }
  r.summary["context"] = context_json(s.ctx);
  r.summary["violations"] = violations;
  r.check("lr_bound_holds", violations == 0);
  return r;
}

ExperimentResult localization_run(const json& cfg, std::uint64_t seed) {
  const LrSetup s = lr_setup(cfg, seed);
  const Region a = cfg.contains("a") ? field(cfg, "a", Region{}) : first_site(s.m);
  if (!a.subset_of(s.m.region) || a.empty()) throw ConfigError("A must be a nonempty part of the model", "/a");
  const auto rs = field(cfg, "rs", std::vector<int>{1, 2});
  const std::vector<double> grid = read_grid(cfg, "t_grid", {0.5, 1, 2, 3, 4, 5});
  Mat O = pauli_like(s.m.local_dim);
  for (std::size_t k = 1; k < a.size(); ++k) O = kron(O, pauli_like(s.m.local_dim));
  ExperimentResult r;
  r.table = CsvTable({"r", "t", "exact", "bound", "ratio"});
  std::size_t violations = 0;
  for (int rad : rs) {
    const BoundSeries b = localization_check(s.m, s.fam, s.ctx, a, O, rad, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) r.table.add({(long long)rad, grid[i], b.exact[i], b.bound[i], b.check.ratio[i]});
    violations += b.check.violations.size();
  }
  r.summary["context"] = context_json(s.ctx);
  r.summary["violations"] = violations;
  r.check("localization_bound_holds", violations == 0);
  return r;
}

ExperimentResult ltqo_run(const json& cfg, std::uint64_t seed) {
  const UniformFamily fam = nested("family", [&] { return family_from_json(required(cfg, "family"), seed); });
  const Geometry g = nested("geometry", [&] { return required(cfg, "geometry").get<Geometry>(); });
  const Region a = field(cfg, "a", Region({g.all_sites()[g.site_count() / 2]}));
  const auto ells = field(cfg, "ells", std::vector<int>{0, 1, 2});
  LtqoOptions opt;
  opt.seed = derive_seed(seed, 2);
  opt.restarts = field(cfg, "restarts", opt.restarts);
  ExperimentResult r;
  r.table = CsvTable({"ell", "value", "exact", "method"});
  std::vector<double> xs, ys;
  for (int ell : ells) {
    const LtqoResult v = ltqo_delta(fam, g, a, ell, opt);
    r.table.add({(long long)ell, v.value, (long long)v.exact, v.method});
    xs.push_back(ell);
    ys.push_back(v.value);
  }
  try {
    const DecayFit f = decay_fit(xs, ys);
    r.summary["decay"] = {{"class", to_string(f.cls)}, {"rate", f.rate}, {"residual", f.residual}};
  } catch (const DomainError&) {
    r.summary["decay"] = nullptr;
  }
  bool bounded = true;
  for (double v : ys) bounded = bounded && v >= 0 && v <= 2 + 1e-9;
  r.check("ltqo_in_range", bounded);
  return r;
}

ExperimentResult correlations_run(const json& cfg, std::uint64_t seed) {
  const int samples = field(cfg, "samples", 100);
  const int max_dim = field(cfg, "max_dim", 4);
  if (samples < 0) throw ConfigError("samples must be nonnegative", "/samples");
  if (max_dim < 2) throw ConfigError("max_dim must be at least 2", "/max_dim");
  Rng rng(derive_seed(seed, 3));
  std::uniform_int_distribution<int> dim(2, max_dim);
  ExperimentResult r;
  r.table = CsvTable({"sample", "dA", "dB", "C", "T", "I", "fannes_applicable"});
  int chain_fail = 0, fannes_fail = 0;
  for (int k = 0; k < samples; ++k) {
    const int dA = dim(rng), dB = dim(rng);
    std::uniform_int_distribution<int> rk(1, dA * dB);
    const BipartiteState s = make_bipartite(random_density_matrix(dA * dB, rng, rk(rng)), dA, dB);
    const double C = covariance_corr(s, 8, derive_seed(seed, 100 + k)).value;
    const double T = trace_corr(s), I = mutual_info(s);
    const FannesCheck f = fannes_check(s);
    if (!(C >= -1e-12 && C <= T + 1e-9 && T <= 2 * std::sqrt(std::max(I, 0.0)) + 1e-9)) ++chain_fail;
    if (f.applicable && !f.holds) ++fannes_fail;
    r.table.add({(long long)k, (long long)dA, (long long)dB, C, T, I, (long long)f.applicable});
  }
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1 / std::sqrt(2.0);
  const BipartiteState b = make_bipartite(Mat(bell * bell.adjoint()), 2, 2);
  const double bT = trace_corr(b), bI = mutual_info(b), bC = covariance_corr(b).value;
  r.summary["bell"] = {{"T", bT}, {"I", bI}, {"C", bC}};
  r.check("chain_C_le_T_le_2sqrtI", chain_fail == 0, std::to_string(chain_fail) + " failures");
  r.check("fannes", fannes_fail == 0, std::to_string(fannes_fail) + " failures");
  r.check("bell_reference", std::abs(bT - 1.5) < 1e-8 && std::abs(bI - 2 * std::log(2.0)) < 1e-8 &&
                                std::abs(bC - 1.0) < 1e-8);
  return r;
}

ExperimentResult glauber_run(const json& cfg, std::uint64_t seed) {
  Potential pot;
  if (cfg.contains("potential")) {
    pot = nested("potential", [&] { return cfg["potential"].get<Potential>(); });
  } else {
    const json is = cfg.value("ising", json{{"J", 0.5}, {"h", 0.2}});
    pot = ising_potential(1, field(is, "J", 0.5), field(is, "h", 0.0));
  }
  const std::string fam_name = field(cfg, "rates", std::string("heat-bath"));
  RateFamily family;
  if (fam_name == "heat-bath") family = RateFamily::heat_bath;
  else if (fam_name == "metropolis") family = RateFamily::metropolis;
  else throw ConfigError("rates must be 'heat-bath' or 'metropolis'", "/rates");
  const Geometry g = cfg.contains("geometry") ? nested("geometry", [&] { return cfg["geometry"].get<Geometry>(); })
                                              : Geometry::chain(3);
  const GlauberRates rates(family, pot, g);
  const Region lambda = field(cfg, "lambda", full_region(g));
  if (!lambda.subset_of(full_region(g)) || lambda.empty()) throw ConfigError("lambda must lie in the geometry", "/lambda");
  const double gamma = field(cfg, "gamma", 1.0);
  const std::vector<double> grid = read_grid(cfg, "t_grid", {0.25, 0.5, 1, 2, 4});

  ExperimentResult r;
  const double db = rates_detailed_balance_residual(rates);
  const FixedPointReport fp = fixed_point_set(rates, lambda, gamma);
  const ClassicalGenerator Q = classical_generator(rates, lambda, 0);
  const Model m = embed(rates, lambda, 0, gamma);
  const double qdb = detailed_balance_residual(generator(m), gibbs(rates, lambda, 0));
  const SplitReport split = contraction_split_check(rates, lambda, 0, gamma, grid, contraction_options(cfg, seed));
  r.table = CsvTable({"t", "eta_total", "eta_classical", "eta_dephasing", "embedding_residual", "holds"});
  double emb = 0.0;
  for (const SplitRow& row : split.rows) {
    const double e = embedding_residual(m, Q.matrix, row.t);
    emb = std::max(emb, e);
    r.table.add({row.t, row.eta_total, row.eta_classical, row.eta_dephasing, e, (long long)row.holds});
  }
  r.summary["rates"] = to_string(family);
  r.summary["c_min"] = rates.c_min();
  r.summary["c_max"] = rates.c_max();
  r.summary["stationary_dim"] = fp.stationary_dim;
  r.summary["gibbs_count"] = fp.gibbs_count;
  r.summary["hausdorff_bound"] = fp.hausdorff_bound;
  r.check("rates_detailed_balance", db < 1e-12, format_double(db));
  r.check("quantum_detailed_balance", qdb < 1e-10, format_double(qdb));
  r.check("fixed_points_are_gibbs_simplex", fp.hausdorff_bound < 1e-8, format_double(fp.hausdorff_bound));
  r.check("diagonal_sector_matches_chain", emb < 1e-10, format_double(emb));
  r.check("contraction_split", split.violations == 0, std::to_string(split.violations) + " violations");
  return r;
}

// presets

const std::vector<double> kDeviationGrid{0.25, 0.5, 1, 2, 4, 8, 16, INFINITY};

// The sup deviation is aε + bε² with b/a ≈ 4, so linearity is fitted on the small values only.
const std::vector<double> kLinearEps{0.001, 0.002, 0.005, 0.01};
const std::vector<double> kLargeEps{0.05, 0.1, 0.2};

ExperimentResult preset_amplitude_damping() {
  ExperimentResult r;
  r.table = CsvTable({"t", "epsilon", "N", "deviation"});
  const Mat O = basis_projector(2, 0);
  const Region a(std::vector<Site>{{0}});
  std::vector<double> eps = kLinearEps, sups;
  eps.insert(eps.end(), kLargeEps.begin(), kLargeEps.end());
  double limit_err = 0.0, spread = 0.0;
  for (double e : eps) {
    std::vector<DeviationSeries> byN;
    for (int N = 2; N <= 5; ++N) {
      const ExamplePair p = amplitude_damping(N, e);
      byN.push_back(observable_deviation(p.base, p.perturbed, O, a, kDeviationGrid));
      for (const DeviationPoint& pt : byN.back().points) r.table.add({pt.t, e, (long long)N, pt.value});
      limit_err = std::max(limit_err, std::abs(byN.back().points.back().value - e * e));
    }
    for (std::size_t i = 0; i < kDeviationGrid.size(); ++i)
      for (const DeviationSeries& s : byN) spread = std::max(spread, std::abs(s.points[i].value - byN[0].points[i].value));
    sups.push_back(byN[0].sup);
  }
  const std::vector<double> small(sups.begin(), sups.begin() + kLinearEps.size());
  const auto [slope, resid] = fit_linear(kLinearEps, small);
  // aε + bε² over every ε
  RMat A(eps.size(), 2);
  RVec y(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    A(i, 0) = eps[i];
    A(i, 1) = eps[i] * eps[i];
    y(i) = sups[i];
  }
  const RVec ab = A.colPivHouseholderQr().solve(y);
  r.summary["epsilon"] = eps;
  r.summary["sup_deviation"] = sups;
  r.summary["linear_slope"] = slope;
  r.summary["linear_residual"] = resid;
  r.summary["quadratic_fit"] = {{"a", ab(0)}, {"b", ab(1)}};
  r.summary["n_spread"] = spread;
  r.check("limit_equals_epsilon_squared", limit_err < 1e-8, format_double(limit_err));
  r.check("size_independent", spread < 1e-8, format_double(spread));
  r.check("linear_in_epsilon", resid < 0.05, format_double(resid));
  return r;
}

ExperimentResult preset_appendix() {
  ExperimentResult r;
  r.table = CsvTable({"t", "N", "deviation"});
  double gap_err = 0.0;
  bool steady = true, diam = true;
  for (int N = 1; N <= 3; ++N) {
    const RMat Q = appendix_generator(N);
    double smallest = INFINITY;
    int zeros = 0;
    for (Index x = 0; x < Q.rows(); ++x) {
      if (Q(x, x) == 0.0) ++zeros;
      else smallest = std::min(smallest, -Q(x, x));
    }
    gap_err = std::max(gap_err, std::abs(smallest - 2.0 / 3));
    steady = steady && zeros == 1 && Q.col(appendix_configuration(N, "01")).cwiseAbs().maxCoeff() == 0.0;
  }
  for (int N = 2; N <= 5; ++N) diam = diam && transition_graph_diameter(appendix_generator(N)) == N;
  double stationary_res = 0.0, dev_min = INFINITY;
  const Region a(std::vector<Site>{{0}, {1}});
  const Mat O = basis_projector(4, 0b10);
  for (int N = 1; N <= 3; ++N) {
    const Model full = appendix_chain(N, AppendixVariant::embedded);
    const Model cut = appendix_chain(N, AppendixVariant::embedded_without_third);
    const Index u = appendix_configuration(N, "10"), n = cut.hilbert_dim();
    stationary_res = std::max(stationary_res, apply_generator(cut, ket_bra(n, u, u)).cwiseAbs().maxCoeff());
    const DeviationSeries s = observable_deviation(full, cut, O, a, kDeviationGrid);
    for (const DeviationPoint& p : s.points) r.table.add({p.t, (long long)N, p.value});
    dev_min = std::min(dev_min, s.sup);
  }
  r.summary["min_sup_deviation"] = dev_min;
  r.check("smallest_rate_two_thirds", gap_err < 1e-9, format_double(gap_err));
  r.check("unique_steady_state_0101", steady);
  r.check("diameter_equals_N", diam);
  r.check("without_third_1010_stationary", stationary_res < 1e-10, format_double(stationary_res));
  r.check("order_one_deviation", dev_min > 0.5, format_double(dev_min));
  return r;
}

ExperimentResult preset_four_level() {
  ExperimentResult r;
  r.table = CsvTable({"t", "N", "pair", "deviation"});
  const double gap = spectral_gap(four_level_site());
  double eig_res = 0.0, dev_min = INFINITY;
  const Region a(std::vector<Site>{{0}});
  for (int N = 2; N <= 3; ++N) {
    const Model base = four_level(N, FourLevelVariant::base);
    const Model plus = four_level(N, FourLevelVariant::plus_E);
    const Model dag = four_level(N, FourLevelVariant::plus_E_dagger);
    std::vector<int> da(N, 0), db(N, 0);
    da[0] = 2;
    db[1] = 2;
    auto proj = [](const std::vector<int>& digits) {
      Mat P = Mat::Ones(1, 1);
      for (int k : digits) P = kron(P, basis_projector(4, k));
      return P;
    };
    const Mat sigma = proj(da) - proj(db);
    eig_res = std::max(eig_res, (apply_generator(plus, sigma) + (2.0 / N) * sigma).cwiseAbs().maxCoeff());
    const Mat O = basis_projector(4, 0);
    for (auto [name, other] : {std::pair<const char*, const Model*>{"base/+E", &base}, {"+E-dagger/+E", &dag}}) {
      const DeviationSeries s = observable_deviation(*other, plus, O, a, kDeviationGrid);
      for (const DeviationPoint& p : s.points) r.table.add({p.t, (long long)N, std::string(name), p.value});
      dev_min = std::min(dev_min, s.points.back().value);
    }
  }
  r.summary["gap"] = gap;
  r.summary["min_limit_deviation"] = dev_min;
  r.check("site_gap_one", std::abs(gap - 1) < 1e-10, format_double(gap));
  r.check("eigen_relation", eig_res < 1e-10, format_double(eig_res));
  r.check("order_one_deviation", dev_min > 0.5, format_double(dev_min));
  return r;
}

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

void ExperimentResult::check(std::string name, bool ok, std::string detail) {
  assertions.push_back({std::move(name), ok, std::move(detail)});
}

json ExperimentResult::report() const {
  json out = summary;
  out["experiment"] = experiment;
  json as = json::array();
  for (const Assertion& a : assertions) as.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  out["assertions"] = as;
  out["passed"] = passed();
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double family_strength_upper(const UniformFamily& fam, const Site& u, int max_radius) {
  std::map<int, double> norm;
  for (const LocalTerm& t : fam.bulk(u)) {
    if (t.radius > max_radius) throw DomainError("term radius beyond the declared range");
    norm[t.radius] += diamond_norm_upper_bound(t.generator);
  }
  double J = 0.0;
  for (const auto& [r, v] : norm) {
    const double f = fam.profile(r);
    if (f <= 0) throw DomainError("term outside the decay profile's support");
    J = std::max(J, v / f);
  }
  return J;
}

BoundSeries lr_check(const Model& m, const BoundContext& ctx, const Region& x, const Mat& O_x,
                     const Region& y, const SuperOp& K, double K_norm,
                     const std::vector<double>& t_grid) {
  std::vector<int> keep;
  for (const Site& s : x) keep.push_back(int(m.region.index_of(s)));
  const std::vector<Index> dims(m.region.size(), m.local_dim);
  const Mat O = embed_operator(O_x, dims, keep);
  const double C = double(std::min(x.size(), y.size()));
  const double dist = distance(m.geometry, x, y), onorm = operator_norm(O_x);
  BoundSeries out;
  Mat Ot = O;
  double t_prev = 0.0;
  for (double t : t_grid) {
    if (t < t_prev) throw DomainError("time grid must be nondecreasing");
    Ot = heisenberg_evolve(m, Ot, t - t_prev);
    t_prev = t;
    out.t.push_back(t);
    out.exact.push_back(operator_norm(apply_local(K, y.sites(), m.region, m.local_dim, Ot)));
    out.bound.push_back(bound_lr(ctx, K_norm, onorm, C, t, dist));
  }
  out.check = verify_bound(out.exact, out.bound);
  return out;
}

BoundSeries localization_check(const Model& m, const UniformFamily& fam, const BoundContext& ctx,
                               const Region& a, const Mat& O_a, int r,
                               const std::vector<double>& t_grid) {
  const Model trunc = truncate(fam, m.geometry, grow(m.geometry, a, r));
  const Model local{m.geometry, m.region, m.local_dim, trunc.terms};
  std::vector<int> keep;
  for (const Site& s : a) keep.push_back(int(m.region.index_of(s)));
  const std::vector<Index> dims(m.region.size(), m.local_dim);
  const Mat O = embed_operator(O_a, dims, keep);
  const double onorm = operator_norm(O_a);
  BoundSeries out;
  Mat O1 = O, O2 = O;
  double t_prev = 0.0;
  for (double t : t_grid) {
    if (t < t_prev) throw DomainError("time grid must be nondecreasing");
    O1 = heisenberg_evolve(m, O1, t - t_prev);
    O2 = heisenberg_evolve(local, O2, t - t_prev);
    t_prev = t;
    out.t.push_back(t);
    out.exact.push_back(operator_norm(O1 - O2));
    out.bound.push_back(bound_localization(ctx, double(a.size()), onorm, t, r));
  }
  out.check = verify_bound(out.exact, out.bound);
  return out;
}

std::vector<SubadditivityRow> commuting_subadditivity(const std::vector<SuperOp>& sites,
                                                      const std::vector<double>& t_grid,
                                                      const ContractionOptions& opt) {
  if (sites.empty()) throw DomainError("need at least one generator");
  const Index d_site = sites[0].dim();
  const Geometry g = Geometry::chain(int(sites.size()));
  const Region all = full_region(g);
  Model m{g, all, int(d_site), {}};
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (sites[j].dim() != d_site) throw DomainError("generators must share their dimension");
    m.terms.push_back({all[j], 0, {all[j]}, sites[j], false});
  }
  const Semigroup whole(generator(m));
  const AsymptoticProjectors P = asymptotic_projectors(whole.generator());
  std::deque<Semigroup> parts;
  std::vector<AsymptoticProjectors> Pj;
  for (const SuperOp& L : sites) {
    parts.emplace_back(L);
    Pj.push_back(asymptotic_projectors(L));
  }
  std::vector<SubadditivityRow> rows;
  for (double t : t_grid) {
    SubadditivityRow row{t, contraction(whole, P, t, opt).value, 0.0};
    for (std::size_t j = 0; j < sites.size(); ++j) row.eta_parts += contraction(parts[j], Pj[j], t, opt).value;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0 && hi > lo && n >= 2)) throw DomainError("log grid needs 0 < lo < hi and n ≥ 2");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"amplitude-damping-stability", "appendix-instability",
                                              "four-level-instability"};
  return names;
}

ExperimentResult run_preset(const std::string& name, const RunOptions&) {
  ExperimentResult r;
  if (name == "amplitude-damping-stability") r = preset_amplitude_damping();
  else if (name == "appendix-instability") r = preset_appendix();
  else if (name == "four-level-instability") r = preset_four_level();
  else throw ConfigError("unknown preset '" + name + "'", "/preset");
  r.experiment = name;
  return r;
}

ExperimentResult run_experiment(const json& config, const RunOptions& opt) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object", "");
  const std::string name = field(config, "experiment", std::string());
  if (name.empty()) throw ConfigError("missing field 'experiment'", "/experiment");
  const std::uint64_t seed = opt.seed ? *opt.seed : field<std::uint64_t>(config, "seed", 1);
  ExperimentResult r;
  if (name == "spectrum") r = spectrum(config, seed);
  else if (name == "contraction") r = contraction_run(config, seed, opt.threads);
  else if (name == "grm-fit") r = grm_fit_run(config, seed);
  else if (name == "stability") r = stability_run(config, seed);
  else if (name == "lr-verify") r = lr_run(config, seed);
  else if (name == "localization-verify") r = localization_run(config, seed);
  else if (name == "ltqo") r = ltqo_run(config, seed);
  else if (name == "correlations") r = correlations_run(config, seed);
  else if (name == "glauber") r = glauber_run(config, seed);
  else if (name == "preset") return run_preset(field(config, "preset", std::string()), opt);
  else throw ConfigError("unknown experiment '" + name + "'", "/experiment");
  r.experiment = name;
  r.summary["seed"] = seed;
  r.summary["config"] = config;
  if (config.contains("expect")) {
    const json& ex = config["expect"];
    if (!ex.is_object()) throw ConfigError("expect must map summary keys to [lo, hi]", "/expect");
    for (const auto& [key, range] : ex.items()) {
      const std::string where = "/expect/" + key;
      if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
        throw ConfigError("expected [lo, hi]", where);
      if (!r.summary.contains(key) || !r.summary[key].is_number())
        throw ConfigError("no numeric summary value '" + key + "'", where);
      const double v = r.summary[key].get<double>();
      r.check("expect_" + key, v >= range[0].get<double>() && v <= range[1].get<double>(), format_double(v));
    }
  }
  return r;
}

}  // namespace lindstab
