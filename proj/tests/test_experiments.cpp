#include "doctest.h"

#include "lindstab/experiments.hpp"
#include "lindstab/zoo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

using namespace lindstab;

namespace {

Mat pauli_z() {
  Mat Z = Mat::Zero(2, 2);
  Z(0, 0) = 1;
  Z(1, 1) = -1;
  return Z;
}

struct Chain {
  UniformFamily fam;
  Model m;
  BoundContext ctx;
};

Chain random_chain(int n, std::uint64_t seed) {
  Chain c;
  c.fam = random_nn_family(seed);
  const Geometry g = Geometry::chain(n);
  c.m = build_open(c.fam, g, full_region(g));
  const double J = family_strength_upper(c.fam, {0}, 1);
  c.ctx = make_context(1, J, c.fam.profile, LRClass::exponential, 1.0, 1.0, 1.0);
  return c;
}

SuperOp random_qubit_generator(Rng& rng) {
  const Mat U = random_unitary(2, rng), V = random_unitary(2, rng);
  Mat L = V;
  L.col(1) *= 0.3;
  return from_gkls(0.5 * (U + U.adjoint()), {L, random_density_matrix(2, rng)});
}

}  // namespace

TEST_CASE("parallel_for covers every index and rethrows") {
  for (int threads : {1, 3, 8}) {
    std::vector<int> hit(50, 0);
    parallel_for(50, threads, [&](int i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
  }
  std::atomic<int> ran{0};
  CHECK_THROWS_AS(parallel_for(20, 4,
                               [&](int i) {
                                 ++ran;
                                 if (i == 7) throw DomainError("boom");
                               }),
                  DomainError);
  parallel_for(0, 4, [](int) { throw std::logic_error("never called"); });
}

TEST_CASE("log_grid") {
  const auto g = log_grid(0.01, 10, 4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(0.01));
  CHECK(g[1] == doctest::Approx(0.1));
  CHECK(g[3] == doctest::Approx(10));
}

TEST_CASE("family strength upper bound dominates the estimator") {
  const UniformFamily fam = random_nn_family(5);
  const double upper = family_strength_upper(fam, {0}, 1);
  CHECK(upper > 0);
  CHECK(std::isfinite(upper));
  // a single-site family: the bound is the diamond upper bound of the one term
  const ExamplePair ad = amplitude_damping(1, 0.0);
  const UniformFamily one = family_from_json("amplitude-damping", 1);
  CHECK(family_strength_upper(one, {0}, 0) ==
        doctest::Approx(diamond_norm_upper_bound(ad.base.terms[0].generator)).epsilon(1e-12));
}

TEST_CASE("Lieb-Robinson check on a random chain") {
  const Chain c = random_chain(5, 11);
  const std::vector<double> grid{0, 0.25, 0.5, 1, 2, 3};
  const SuperOp K = identity_map(2) - sandwich(pauli_z(), pauli_z());
  for (int y : {1, 2, 4}) {
    const BoundSeries b = lr_check(c.m, c.ctx, Region({Site{0}}), pauli_z(), Region({Site{y}}), K, 2.0, grid);
    CHECK(b.check.violations.empty());
    CHECK(b.exact[0] == doctest::Approx(0.0).epsilon(1e-12));
    for (double e : b.exact) CHECK(e <= 2 * 2 + 1e-9);  // ‖K‖·‖O‖
  }
  // K acting where the observable sits: K(X) = 2X
  Mat X = Mat::Zero(2, 2);
  X(0, 1) = X(1, 0) = 1;
  const BoundSeries same = lr_check(c.m, c.ctx, Region({Site{0}}), X, Region({Site{0}}), K, 2.0, {0.0});
  CHECK(same.exact[0] == doctest::Approx(2.0));
}

TEST_CASE("localization check on a random chain") {
  const Chain c = random_chain(5, 12);
  const std::vector<double> grid{0, 0.5, 1, 2};
  const Region a({Site{2}});
  for (int r : {0, 1}) {
    const BoundSeries b = localization_check(c.m, c.fam, c.ctx, a, pauli_z(), r, grid);
    CHECK(b.check.violations.empty());
    CHECK(b.exact[0] == doctest::Approx(0.0).epsilon(1e-12));
  }
  // A(r) covering the whole chain reproduces the full dynamics
  const BoundSeries all = localization_check(c.m, c.fam, c.ctx, a, pauli_z(), 2, grid);
  for (double e : all.exact) CHECK(e < 1e-10);
}

TEST_CASE("commuting contractions are subadditive") {
  Rng rng(21);
  std::vector<SuperOp> parts;
  for (int k = 0; k < 3; ++k) parts.push_back(random_qubit_generator(rng));
  ContractionOptions opt;
  opt.seed = 3;
  for (const SubadditivityRow& row : commuting_subadditivity(parts, {0.1, 1, 5}, opt)) {
    CHECK(row.eta_sum <= row.eta_parts + 1e-3);
    CHECK(row.eta_sum >= 0);
  }
}

TEST_CASE("every experiment runs on a small config") {
  const json ad2 = json::parse(R"({"family": "amplitude-damping", "geometry": {"extent": [2]}})");
  const json nn = json::parse(R"({"family": "random-nn", "geometry": {"extent": [4]}})");
  std::vector<json> configs{
      {{"experiment", "spectrum"}, {"model", ad2}},
      {{"experiment", "contraction"}, {"model", ad2}, {"t_grid", {0.5, 2}}},
      {{"experiment", "grm-fit"}, {"family", "amplitude-damping"}, {"sizes", {1, 2}}, {"t_grid", {1, 2}}},
      {{"experiment", "lr-verify"}, {"model", nn}, {"dists", {2, 3}}, {"t_grid", {0.5, 1}}},
      {{"experiment", "localization-verify"}, {"model", nn}, {"a", {{1}}}, {"rs", {1}}, {"t_grid", {0.5, 1}}},
      {{"experiment", "ltqo"}, {"family", "amplitude-damping"}, {"geometry", {{"extent", {3}}}}, {"ells", {0, 1}}},
      {{"experiment", "correlations"}, {"samples", 10}, {"max_dim", 3}},
      {{"experiment", "glauber"}, {"geometry", {{"extent", {3}}}}, {"t_grid", {0.5, 2}}},
  };
  json stab = {{"experiment", "stability"}, {"model", ad2}, {"t_grid", {1, "inf"}}};
  stab["model"]["perturbation"] =
      json::parse(R"({"epsilon": 0.1, "terms": [{"offsets": [[0]], "hamiltonian": [[0, 1], [1, 0]]}]})");
  configs.push_back(stab);
  for (const json& cfg : configs) {
    CAPTURE(cfg.dump());
    const ExperimentResult r = run_experiment(cfg, {});
    CHECK(r.passed());
    CHECK(r.table.size() > 0);
    const json rep = r.report();
    CHECK(rep["seed"] == 1);
    CHECK(rep["passed"] == true);
  }
}

TEST_CASE("experiment config errors") {
  CHECK_THROWS_AS(run_experiment(json::parse(R"({"experiment": "spectrum"})"), {}), ConfigError);
  CHECK_THROWS_AS(run_experiment(json::parse(R"({"experiment": "lr-verify",
      "model": {"family": "random-nn", "geometry": {"extent": [3]}}, "dists": [5]})"), {}), ConfigError);
  CHECK_THROWS_AS(run_experiment(json::parse(R"({"experiment": "glauber", "rates": "kawasaki"})"), {}), ConfigError);
  CHECK_THROWS_AS(run_preset("nope", {}), ConfigError);
}

TEST_CASE("seeds are honoured and threads do not change results") {
  const json cfg = json::parse(R"({"experiment": "correlations", "samples": 6, "max_dim": 3, "seed": 4})");
  RunOptions one, many, other;
  many.threads = 4;
  other.seed = 5;
  const std::string a = run_experiment(cfg, one).table.str();
  CHECK(a == run_experiment(cfg, many).table.str());
  CHECK(a != run_experiment(cfg, other).table.str());
  CHECK(run_experiment(cfg, other).report()["seed"] == 5);
}
