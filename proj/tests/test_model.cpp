#include "doctest.h"

#include "lindstab/dynamics.hpp"
#include "lindstab/model.hpp"

#include <cmath>

using namespace lindstab;

namespace {

Mat random_matrix(Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Mat M(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = cplx(g(rng), g(rng));
  return M;
}

struct BondData {
  Mat h_site, l_site;  // on-site Hamiltonian and jump
  Mat h_bond, l_bond;  // two-site Hamiltonian and jump, factor order (u, u+1)
};

BondData random_bond_data(std::uint64_t seed) {
  Rng rng(seed);
  BondData b;
  b.h_site = hermitian_part(random_matrix(2, rng));
  b.l_site = 0.5 * random_matrix(2, rng);
  b.h_bond = 0.5 * hermitian_part(random_matrix(4, rng));
  b.l_bond = 0.3 * random_matrix(4, rng);
  return b;
}

UniformFamily chain_family(const BondData& b, BoundaryRule rule = BoundaryRule::open) {
  UniformFamily f;
  f.name = "random-nn";
  f.local_dim = 2;
  f.J = 10.0;
  f.profile = DecayProfile::finite_range(1);
  f.boundary = rule;
  SuperOp site = from_gkls(b.h_site, {b.l_site});
  SuperOp bond = from_gkls(b.h_bond, {b.l_bond});
  f.bulk = [site, bond](const Site& u) {
    std::vector<LocalTerm> out;
    out.push_back({u, 0, {u}, site, false});
    out.push_back({u, 1, {u, {u[0] + 1}}, bond, false});
    return out;
  };
  return f;
}

Mat swap2() {
  Mat S = Mat::Zero(4, 4);
  S(0, 0) = S(3, 3) = 1.0;
  S(1, 2) = S(2, 1) = 1.0;
  return S;
}

// Direct global GKLS assembly: embed H and jumps, then build the generator once.
SuperOp hand_chain(const BondData& b, int n, bool ring) {
  std::vector<Index> dims(n, 2);
  Mat H = Mat::Zero(Index(1) << n, Index(1) << n);
  std::vector<Mat> jumps;
  for (int i = 0; i < n; ++i) {
    H += embed_operator(b.h_site, dims, {i});
    jumps.push_back(embed_operator(b.l_site, dims, {i}));
  }
  for (int i = 0; i + 1 < n; ++i) {
    H += embed_operator(b.h_bond, dims, {i, i + 1});
    jumps.push_back(embed_operator(b.l_bond, dims, {i, i + 1}));
  }
  if (ring) {
    // bond (n−1, 0): local factor order is (n−1, 0) but embed_operator uses (0, n−1)
    const Mat S = swap2();
    H += embed_operator(Mat(S * b.h_bond * S), dims, {0, n - 1});
    jumps.push_back(embed_operator(Mat(S * b.l_bond * S), dims, {0, n - 1}));
  }
  return from_gkls(H, jumps);
}

SuperOp replace_minus_identity() { return from_gkls(Mat::Zero(2, 2), {ket_bra(2, 0, 0), ket_bra(2, 0, 1)}); }

}  // namespace

TEST_CASE("assemble_open") {
  BondData b = random_bond_data(1);
  UniformFamily f = chain_family(b);
  Geometry g = Geometry::chain(6);
  Model single = build_open(f, g, interval(2, 2));
  REQUIRE(single.terms.size() == 1);
  CHECK(single.terms[0].radius == 0);

  Geometry g4 = Geometry::chain(4);
  SuperOp L = assemble_open(f, g4, full_region(g4));
  CHECK((L.matrix - hand_chain(b, 4, false).matrix).norm() < 1e-12);
  CHECK(is_valid_lindbladian(L).overall);

  UniformFamily empty = f;
  empty.bulk = [](const Site&) { return std::vector<LocalTerm>{}; };
  CHECK(assemble_open(empty, g4, full_region(g4)).matrix.norm() == 0.0);
  CHECK(truncate(f, g, interval(1, 3)).terms.size() == build_open(f, g, interval(1, 3)).terms.size());
}

TEST_CASE("matrix-free application matches the dense generator") {
  BondData b = random_bond_data(2);
  UniformFamily f = chain_family(b);
  Geometry g = Geometry::chain(4);
  Model m = build_open(f, g, full_region(g));
  SuperOp L = generator(m);
  Rng rng(3);
  Mat X = random_matrix(16, rng);
  CHECK((apply_generator(m, X) - L(X)).norm() < 1e-12);
  CHECK((apply_generator_dual(m, X) - dual(L)(X)).norm() < 1e-12);
}

TEST_CASE("assemble_closed") {
  BondData b = random_bond_data(4);
  Geometry g = Geometry::chain(4);
  Region lam = full_region(g);
  UniformFamily open = chain_family(b, BoundaryRule::open);
  CHECK(assemble_closed(open, g, lam).matrix == assemble_open(open, g, lam).matrix);

  UniformFamily per = chain_family(b, BoundaryRule::periodic);
  auto bc = boundary_condition(per, g, lam);
  REQUIRE(bc.size() == 1);
  CHECK(bc[0].depth == 1);
  CHECK((assemble_closed(per, g, lam).matrix - hand_chain(b, 4, true).matrix).norm() < 1e-12);
  int bonds = 0;
  for (const LocalTerm& t : build_closed(per, g, lam).terms) bonds += t.radius == 1;
  CHECK(bonds == 4);
  for (const BoundaryAudit& a : audit_boundary(per, g, lam)) CHECK(a.ok);
}

TEST_CASE("property: translation invariance of the periodic assembly") {
  BondData b = random_bond_data(5);
  UniformFamily per = chain_family(b, BoundaryRule::periodic);
  Geometry g = Geometry::chain(4);
  SuperOp L = assemble_closed(per, g, full_region(g));
  // cyclic shift of the four qubits
  Mat U = Mat::Zero(16, 16);
  for (int s = 0; s < 16; ++s) {
    int bits[4], out = 0;
    for (int k = 0; k < 4; ++k) bits[k] = (s >> (3 - k)) & 1;
    for (int k = 0; k < 4; ++k) out |= bits[k] << (3 - (k + 1) % 4);
    U(out, s) = 1.0;
  }
  SuperOp S = sandwich(U, U.adjoint());
  SuperOp Sinv = sandwich(U.adjoint(), U);
  CHECK((compose(S, compose(L, Sinv)).matrix - L.matrix).norm() < 1e-12);
}

TEST_CASE("property: uniformity of the bulk rule") {
  BondData b = random_bond_data(6);
  UniformFamily f = chain_family(b);
  Geometry g = Geometry::chain(15);
  Region interior = interval(5, 9);
  auto inner_terms = [&](const Region& lam) {
    std::vector<LocalTerm> out;
    for (const LocalTerm& t : build_open(f, g, lam).terms) {
      bool in = true;
      for (const Site& s : t.support) in = in && interior.contains(s);
      if (in) out.push_back(t);
    }
    return out;
  };
  auto a = inner_terms(interval(3, 11));
  auto c = inner_terms(interval(0, 14));
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].support == c[i].support);
    CHECK(a[i].generator.matrix == c[i].generator.matrix);
  }
}

TEST_CASE("perturbations") {
  Geometry g = Geometry::chain(2);
  Region lam = full_region(g);
  UniformFamily f;
  f.local_dim = 2;
  SuperOp ad = from_gkls(Mat::Zero(2, 2), {ket_bra(2, 0, 1)});
  f.bulk = [ad](const Site& u) { return std::vector<LocalTerm>{{u, 0, {u}, ad, false}}; };
  Model base = build_open(f, g, lam);
  SuperOp L0 = generator(base);

  // E = L^ε − L with the rotated jump |α₀><α₁|
  auto rotated = [](double eps) {
    Vec a0(2), a1(2);
    a0 << std::sqrt(1 - eps * eps), eps;
    a1 << -eps, std::sqrt(1 - eps * eps);
    return from_gkls(Mat::Zero(2, 2), {Mat(a0 * a1.adjoint())});
  };
  Perturbation p;
  p.epsilon = 0.0;
  p.terms.push_back({{0}, 0, {{0}}, rotated(0.1) - ad, true});
  CHECK(apply_perturbation(base, p).generator.matrix == L0.matrix);

  p.epsilon = 1.0;
  auto res = apply_perturbation(base, p, true);
  CHECK(res.warnings.empty());
  CHECK(is_valid_lindbladian(res.generator).overall);

  // linear in ε
  p.epsilon = 0.5;
  Mat d1 = apply_perturbation(base, p).generator.matrix - L0.matrix;
  p.epsilon = 1.5;
  Mat d3 = apply_perturbation(base, p).generator.matrix - L0.matrix;
  CHECK((d3 - 3.0 * d1).norm() < 1e-13);

  // ‖L^ε − L‖ = O(ε)
  const double n1 = induced_1to1_norm_estimate(rotated(0.1) - ad).value;
  const double n2 = induced_1to1_norm_estimate(rotated(0.05) - ad).value;
  CHECK(n1 < 0.5);
  CHECK(n1 / n2 == doctest::Approx(2.0).epsilon(0.05));

  Perturbation bad;
  bad.epsilon = 1.0;
  bad.terms.push_back({{0}, 0, {{0}}, identity_map(2), true});
  CHECK_THROWS_AS(apply_perturbation(base, bad), ValidationError);
}

TEST_CASE("strength estimate") {
  SuperOp r = replace_minus_identity();
  UniformFamily one;
  one.bulk = [r](const Site& u) { return std::vector<LocalTerm>{{u, 0, {u}, r, false}}; };
  StrengthEstimate s = strength_estimate(one, {0}, 3);
  CHECK(s.J == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(s.profile.kind == DecayProfile::Kind::finite_range);
  CHECK(s.profile.param == 0.0);

  UniformFamily geo;
  geo.bulk = [r](const Site& u) {
    std::vector<LocalTerm> out;
    for (int k = 0; k <= 5; ++k) out.push_back({u, k, {u}, std::ldexp(1.0, -k) * r, false});
    return out;
  };
  StrengthEstimate e = strength_estimate(geo, {0}, 5);
  CHECK(e.profile.kind == DecayProfile::Kind::exponential);
  CHECK(e.profile.param == doctest::Approx(std::log(2.0)).epsilon(0.05));

  UniformFamily zero;
  zero.bulk = [](const Site& u) {
    return std::vector<LocalTerm>{{u, 0, {u}, zero_map(2), false}};
  };
  CHECK(strength_estimate(zero, {0}, 2).J == 0.0);
}

TEST_CASE("decay profiles") {
  CHECK(DecayProfile::finite_range(2)(2) == 1.0);
  CHECK(DecayProfile::finite_range(2)(3) == 0.0);
  CHECK(DecayProfile::exponential(1.0)(0) == 1.0);
  CHECK(DecayProfile::power(2.0)(3) == doctest::Approx(1.0 / 16));
  CHECK(DecayProfile::quasi_local(1.0)(4) == doctest::Approx(std::exp(-2.0)));
}
