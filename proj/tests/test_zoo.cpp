#include "doctest.h"

#include "lindstab/dynamics.hpp"
#include "lindstab/zoo.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace lindstab;

namespace {

Mat apply_map(const SuperOp& L, const Mat& X) { return unvec(Vec(L.matrix * vec(X)), X.rows()); }

Mat product_projector(int d, const std::vector<int>& digits) {
  Mat P = Mat::Ones(1, 1);
  for (int k : digits) P = kron(P, basis_projector(d, k));
  return P;
}

// Q_c, Q_r, Q_l transcribed with rows = from, columns = to, order (|10>, |00>, |11>, |01>).
RMat pair_matrix(char which, int N) {
  RMat M = RMat::Zero(4, 4);
  const double s = 2.0 / (3.0 * N);
  if (which == 'c') M << -s, 0, 0, s, 0, -1, 0, 1, 0, 0, -1, 1, 0, 0, 0, 0;
  if (which == 'r') M << -1, 0, 1, 0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0;
  if (which == 'l') M << -1, 1, 0, 0, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0;
  return M;
}

// Q_i = 1⊗Q_c⊗1 + 1⊗Q_r⊗δ₀ + δ₁⊗Q_l⊗1 on (left spin, pair, right spin), measure side.
RMat appendix_oracle(int N) {
  const int n = 2 * N;
  const Index m = Index(1) << n;
  const int code[4] = {0b10, 0b00, 0b11, 0b01};
  int slot[4];
  for (int p = 0; p < 4; ++p) slot[code[p]] = p;
  const RMat Qc = pair_matrix('c', N), Qr = pair_matrix('r', N), Ql = pair_matrix('l', N);
  auto bit = [n](Index x, int k) { return int((x >> (n - 1 - ((k % n + n) % n))) & 1); };
  RMat Q = RMat::Zero(m, m);
  for (Index x = 0; x < m; ++x)
    for (int i = 0; i < N; ++i) {
      const int a = 2 * i, b = 2 * i + 1;
      const int p = slot[2 * bit(x, a) + bit(x, b)];
      RMat R = Qc;
      if (bit(x, 2 * i + 2) == 0) R += Qr;
      if (bit(x, 2 * i - 1) == 1) R += Ql;
      for (int q = 0; q < 4; ++q) {
        if (q == p || R(p, q) == 0.0) continue;
        Index y = x;
        y &= ~((Index(1) << (n - 1 - a)) | (Index(1) << (n - 1 - b)));
        y |= Index((code[q] >> 1) & 1) << (n - 1 - a);
        y |= Index(code[q] & 1) << (n - 1 - b);
        Q(y, x) += R(p, q);
        Q(x, x) -= R(p, q);
      }
    }
  return Q;
}

}  // namespace

TEST_CASE("amplitude damping pair") {
  const double eps = 0.1;
  ExamplePair p = amplitude_damping(3, eps);
  const Mat fp = fixed_point(generator(p.perturbed));
  const Vec a = alpha0(eps);
  const Vec a3 = kron(kron(a, a), a);
  CHECK((fp - a3 * a3.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  // |<0..0|α₀..α₀>|² = (1−ε²)^N
  CHECK(std::abs(fp(0, 0).real() - std::pow(1 - eps * eps, 3)) < 1e-10);
  CHECK(std::abs(fixed_point(generator(p.base))(0, 0).real() - 1.0) < 1e-12);

  ExamplePair q = amplitude_damping(4, eps);
  for (int r = 1; r <= 4; ++r) {
    const Mat O = kron(product_projector(2, std::vector<int>(r, 0)), Mat::Identity(1 << (4 - r), 1 << (4 - r)));
    const Mat lim0 = heisenberg_limit(q.base, O), lim1 = heisenberg_limit(q.perturbed, O);
    CHECK((lim0 - Mat::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((lim1 - std::pow(1 - eps * eps, r) * Mat::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-8);
  }

  ExamplePair z = amplitude_damping(2, 0.0);
  CHECK((generator(z.base).matrix - generator(z.perturbed).matrix).norm() == 0.0);
}

TEST_CASE("four-level example") {
  const SuperOp L0 = four_level_site();
  auto chi = [](int i) { return (i == 1 || i == 3) ? 1.0 : 0.0; };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Mat out = apply_map(L0, ket_bra(4, i, j));
      Mat want;
      if (i == j && chi(i) == 1.0)
        want = basis_projector(4, 0) + basis_projector(4, 2) - 2 * ket_bra(4, i, j);
      else if (i == j)
        want = Mat::Zero(4, 4);
      else
        want = -(chi(i) + chi(j)) * ket_bra(4, i, j);
      CHECK((out - want).cwiseAbs().maxCoeff() < 1e-15);
    }
  CHECK(spectral_gap(L0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(asymptotic_projectors(L0).stationary_dim == 4);

  for (int N : {2, 3}) {
    const Model plus = four_level(N, FourLevelVariant::plus_E);
    std::vector<int> a(N, 0), b(N, 0);
    a[0] = 2;
    b[1] = 2;
    const Mat sigma = product_projector(4, a) - product_projector(4, b);
    CHECK((apply_generator(plus, sigma) + (2.0 / N) * sigma).cwiseAbs().maxCoeff() < 1e-14);
    const Mat zero = product_projector(4, std::vector<int>(N, 0));
    const Mat two = product_projector(4, std::vector<int>(N, 2));
    CHECK(apply_generator(plus, zero).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(apply_generator(four_level(N, FourLevelVariant::plus_E_dagger), two).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(apply_generator(four_level(N, FourLevelVariant::base), zero).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(apply_generator(four_level(N, FourLevelVariant::base), two).cwiseAbs().maxCoeff() < 1e-14);
  }
  // uniqueness at N = 2
  CHECK((fixed_point(generator(four_level(2, FourLevelVariant::plus_E))) - product_projector(4, {0, 0}))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK((fixed_point(generator(four_level(2, FourLevelVariant::plus_E_dagger))) - product_projector(4, {2, 2}))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK_THROWS_AS(fixed_point(generator(four_level(2, FourLevelVariant::base))), UniquenessError);
}

TEST_CASE("appendix chain: classical generator") {
  for (int N = 1; N <= 4; ++N) {
    const RMat Q = appendix_generator(N);
    CHECK((Q - appendix_oracle(N)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(Q.colwise().sum().cwiseAbs().maxCoeff() < 1e-14);

    // upper triangular (rows = from) in the pair order
    const std::vector<Index> perm = appendix_pair_order(N);
    const Index m = Q.rows();
    double below = 0.0;
    for (Index p = 0; p < m; ++p)
      for (Index q = 0; q < p; ++q) below = std::max(below, std::abs(Q(perm[q], perm[p])));
    CHECK(below == 0.0);

    const Index steady = appendix_configuration(N, "01");
    CHECK(Q.col(steady).cwiseAbs().maxCoeff() == 0.0);
    double smallest = INFINITY;
    Index where = -1;
    int zeros = 0;
    for (Index x = 0; x < m; ++x) {
      const double d = -Q(x, x);
      if (d == 0.0) {
        ++zeros;
        continue;
      }
      if (d < smallest) {
        smallest = d;
        where = x;
      }
    }
    CHECK(zeros == 1);
    if (N <= 3) {
      CHECK(smallest == doctest::Approx(2.0 / 3).epsilon(1e-12));
      CHECK(where == appendix_configuration(N, "10"));
    }
  }
  // eigenvalues directly for N = 3
  Eigen::EigenSolver<RMat> es(appendix_generator(3));
  double smallest = INFINITY;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double a = std::abs(es.eigenvalues()(i));
    if (a > 1e-9) smallest = std::min(smallest, a);
  }
  CHECK(smallest == doctest::Approx(2.0 / 3).epsilon(1e-8));
  CHECK_THROWS_AS(appendix_generator(7), ResourceError);
}

TEST_CASE("appendix chain: transition graph diameter") {
  for (int N = 2; N <= 6; ++N) CHECK(transition_graph_diameter(appendix_generator(N)) == N);
}

TEST_CASE("appendix chain: embedding") {
  for (int N = 1; N <= 3; ++N) {
    const Model m = appendix_chain(N, AppendixVariant::embedded, 0.7);
    const RMat Q = appendix_generator(N);
    const Index n = m.hilbert_dim();
    for (Index x = 0; x < n; ++x) {
      const Mat out = apply_generator(m, ket_bra(n, x, x));
      Mat want = Mat::Zero(n, n);
      want.diagonal() = Q.col(x).cast<cplx>();
      CHECK((out - want).cwiseAbs().maxCoeff() < 1e-14);
    }
    const Index s = appendix_configuration(N, "01"), u = appendix_configuration(N, "10");
    CHECK(apply_generator(m, ket_bra(n, s, s)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(apply_generator(m, ket_bra(n, u, u)).cwiseAbs().maxCoeff() > 0.1);
    const Model cut = appendix_chain(N, AppendixVariant::embedded_without_third, 0.7);
    CHECK(apply_generator(cut, ket_bra(n, u, u)).cwiseAbs().maxCoeff() < 1e-10);
  }
  const Model m2 = appendix_chain(2, AppendixVariant::embedded, 1.0);
  CHECK(is_valid_lindbladian(generator(m2)).overall);
  const Mat fp = fixed_point(generator(m2));
  const Index s = appendix_configuration(2, "01");
  CHECK(std::abs(fp(s, s).real() - 1.0) < 1e-10);
}

TEST_CASE("observable deviation") {
  ExamplePair p = amplitude_damping(4, 0.1);
  const Mat O = basis_projector(2, 0);
  const Region site0(std::vector<Site>{{0}});
  DeviationSeries same = observable_deviation(p.base, p.base, O, site0, {0.5, 1.0, 4.0, INFINITY});
  CHECK(same.sup == 0.0);

  // local deviation is O(ε) and does not depend on N
  std::vector<double> sups;
  for (int N : {2, 3, 4}) {
    ExamplePair q = amplitude_damping(N, 0.1);
    DeviationSeries s = observable_deviation(q.base, q.perturbed, O, site0, {0.5, 1.0, 2.0, 10.0, INFINITY});
    CHECK(std::abs(s.points.back().value - 0.01) < 1e-8);
    CHECK(s.sup < 0.5);
    sups.push_back(s.sup);
  }
  CHECK(std::abs(sups[0] - sups[2]) < 1e-9);

  for (int N : {2, 3}) {
    const Model e = four_level(N, FourLevelVariant::plus_E);
    const Model ed = four_level(N, FourLevelVariant::plus_E_dagger);
    DeviationSeries s = observable_deviation(e, ed, basis_projector(4, 0), site0, {1.0, INFINITY});
    CHECK(std::abs(s.points.back().value - 1.0) < 1e-8);
  }
  CHECK_THROWS_AS(observable_deviation(p.base, amplitude_damping(3, 0.1).base, O, site0, {1.0}), DomainError);
}
