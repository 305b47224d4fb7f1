#include "doctest.h"

#include "lindstab/correlations.hpp"
#include "lindstab/dynamics.hpp"

#include <cmath>

using namespace lindstab;

namespace {

Mat bell() {
  Vec phi = Vec::Zero(4);
  phi(0) = phi(3) = 1 / std::sqrt(2.0);
  return phi * phi.adjoint();
}

Region sites(std::initializer_list<int> xs) {
  std::vector<Site> s;
  for (int x : xs) s.push_back({x});
  return Region(s);
}

UniformFamily sitewise_family(const SuperOp& local, int d) {
  UniformFamily f;
  f.local_dim = d;
  f.bulk = [local](const Site& u) { return std::vector<LocalTerm>{{u, 0, {u}, local, false}}; };
  return f;
}

SuperOp four_level_site() {
  return from_gkls(Mat::Zero(4, 4), {ket_bra(4, 0, 1), ket_bra(4, 0, 3), ket_bra(4, 2, 1), ket_bra(4, 2, 3)});
}

SuperOp ad_site() { return from_gkls(Mat::Zero(2, 2), {ket_bra(2, 0, 1)}); }

Mat random_matrix(Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Mat M(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = cplx(g(rng), g(rng));
  return M;
}

}  // namespace

TEST_CASE("reference values") {
  BipartiteState me = make_bipartite(bell(), 2, 2);
  CHECK(trace_corr(me) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(mutual_info(me) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(covariance_corr(me).value - 1.0) < 1e-8);

  Rng rng(1);
  BipartiteState prod = make_bipartite(kron(random_density_matrix(2, rng), random_density_matrix(3, rng)), 2, 3);
  CHECK(trace_corr(prod) < 1e-12);
  CHECK(mutual_info(prod) < 1e-12);
  CHECK(covariance_corr(prod).value < 1e-12);
  CHECK_THROWS_AS(make_bipartite(Mat::Identity(4, 4), 2, 2), DomainError);
}

TEST_CASE("trace_corr dual formulation") {
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    BipartiteState s = make_bipartite(random_density_matrix(6, rng), 2, 3);
    Mat d = s.rho - s.product();
    CHECK(std::abs(std::abs((hermitian_sign(hermitian_part(d)) * d).trace()) - trace_corr(s)) < 1e-9);
  }
}

TEST_CASE("property: correlation chain and Fannes bound") {
  Rng rng(3);
  int fannes_cases = 0;
  for (int k = 0; k < 150; ++k) {
    const Index dA = 2 + k % 3, dB = 2 + (k / 3) % 3;
    Mat rho = random_density_matrix(dA * dB, rng, 1 + k % 4);
    if (k % 2) {
      const double p = 0.02 * (k % 5);
      rho = (1 - p) * kron(random_density_matrix(dA, rng), random_density_matrix(dB, rng)) + p * rho;
    }
    BipartiteState s = make_bipartite(rho, dA, dB);
    const double C = covariance_corr(s, 8).value, T = trace_corr(s), I = mutual_info(s);
    CHECK(C >= 0.0);
    CHECK(C <= T + 1e-9);
    CHECK(T <= 2 * std::sqrt(I) + 1e-9);
    FannesCheck f = fannes_check(s);
    if (f.applicable) {
      ++fannes_cases;
      CHECK(f.holds);
    }
    CHECK((I < 1e-10) == (T < 1e-9));
  }
  CHECK(fannes_cases > 10);
}

TEST_CASE("make_bipartite reorders interleaved subsystems") {
  Rng rng(4);
  Mat r0 = random_density_matrix(2, rng), r1 = random_density_matrix(2, rng), r2 = random_density_matrix(2, rng);
  Mat rho = kron(kron(r0, r1), r2);
  BipartiteState s = make_bipartite(rho, sites({0, 1, 2}), 2, sites({0, 2}), sites({1}));
  CHECK(s.dA == 4);
  CHECK((s.rho - kron(kron(r0, r2), r1)).norm() < 1e-14);
  CHECK_THROWS_AS(make_bipartite(rho, sites({0, 1, 2}), 2, sites({0, 1}), sites({1})), DomainError);
}

TEST_CASE("ltqo_delta") {
  // unique fixed point: zero
  CHECK(ltqo_delta(ad_site(), sites({0}), 2, sites({0})).value < 1e-10);
  Geometry g = Geometry::chain(7);
  UniformFamily ad = sitewise_family(ad_site(), 2);
  CHECK(ltqo_delta(ad, g, sites({3}), 1).value < 1e-10);

  // four-level sites: |0><0| and |2><2| are both stationary
  LtqoResult one = ltqo_delta(four_level_site(), sites({0}), 4, sites({0}));
  CHECK(one.method == "dense");
  CHECK(std::abs(one.value - 2.0) < 1e-8);
  UniformFamily four = sitewise_family(four_level_site(), 4);
  LtqoOptions few;
  few.restarts = 4;
  LtqoResult ell1 = ltqo_delta(four, g, sites({3}), 1, few);
  CHECK(ell1.method == "matrix-free");
  CHECK(std::abs(ell1.value - 2.0) < 1e-8);

  // classical: a two-state chain with two absorbing states, then an ergodic one
  RMat Q0 = RMat::Zero(2, 2);
  CHECK(ltqo_delta_classical(Q0, sites({0}), 2, sites({0})).value == doctest::Approx(2.0));
  RMat Q1(2, 2);
  Q1 << -1, 2, 1, -2;
  CHECK(ltqo_delta_classical(Q1, sites({0}), 2, sites({0})).value < 1e-12);
  RMat P = classical_limit(Q1);
  CHECK(P(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(P(0, 1) == doctest::Approx(2.0 / 3));

  // dephasing plus reset on the first of two qubits: classical stationary set on site 1
  SuperOp deph = schur_multiplier(hamming_dephasing_coeffs(1, 1.0));
  Model m{Geometry::chain(2), sites({0, 1}), 2, {}};
  m.terms.push_back({{0}, 0, {{0}}, ad_site(), false});
  m.terms.push_back({{1}, 0, {{1}}, deph, false});
  LtqoResult c = ltqo_delta(m, sites({1}));
  CHECK(c.exact);
  CHECK(c.value == doctest::Approx(2.0));
  CHECK(ltqo_delta(m, sites({0})).value < 1e-10);
}

TEST_CASE("fixed_point_indistinguishability") {
  Geometry g = Geometry::chain(4);
  Region lam = full_region(g);
  UniformFamily ad = sitewise_family(ad_site(), 2);
  StrengthEstimate se = strength_estimate(ad, {0}, 1);
  BoundContext ctx = make_context(1, se.J, DecayProfile::finite_range(0), LRClass::exponential, 1.0, 0.5, 1.0);
  Mat O = basis_projector(2, 1) - basis_projector(2, 0);
  for (int s : {1, 2}) {
    Indistinguishability r = fixed_point_indistinguishability(ad, g, lam, sites({1}), s, O, ctx);
    CHECK(r.lhs <= r.rhs);
  }

  // an interacting chain: identical generators when A(s) = Λ
  Rng rng(5);
  SuperOp bond = from_gkls(hermitian_part(random_matrix(4, rng)), {0.5 * random_matrix(4, rng)});
  SuperOp site = from_gkls(Mat::Zero(2, 2), {ket_bra(2, 0, 1), 0.3 * ket_bra(2, 1, 0)});
  UniformFamily f;
  f.bulk = [bond, site](const Site& u) {
    return std::vector<LocalTerm>{{u, 0, {u}, site, false}, {u, 1, {u, {u[0] + 1}}, bond, false}};
  };
  Indistinguishability full = fixed_point_indistinguishability(f, g, lam, sites({1}), 3, O, ctx);
  CHECK(full.lhs < 1e-12);
  Indistinguishability part = fixed_point_indistinguishability(f, g, lam, sites({1}), 0, O, ctx);
  CHECK(part.lhs > 1e-6);
}

TEST_CASE("decay_fit") {
  std::vector<double> x, e, p, z;
  for (int i = 0; i < 12; ++i) {
    x.push_back(i);
    e.push_back(std::exp(-2.0 * i));
    p.push_back(std::pow(1.0 + i, -3.0));
  }
  DecayFit fe = decay_fit(x, e);
  CHECK(fe.cls == DecayFit::Class::exponential);
  CHECK(fe.rate == doctest::Approx(2.0).epsilon(0.05));
  DecayFit fp = decay_fit(x, p);
  CHECK(fp.cls == DecayFit::Class::power);
  CHECK(fp.rate == doctest::Approx(3.0).epsilon(0.05));

  std::vector<double> mix;
  for (int i = 0; i < 12; ++i) mix.push_back(std::exp(-0.5 * i) * std::pow(1.0 + i, -1.0));
  DecayFit fm = decay_fit(x, mix);
  CHECK(fm.residual == std::min(fm.exp_residual, fm.power_residual));

  std::vector<double> few{1.0, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(decay_fit({0, 1, 2, 3}, few), DomainError);
}
