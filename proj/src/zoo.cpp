#include "lindstab/zoo.hpp"

#include "lindstab/dynamics.hpp"
#include "lindstab/linalg.hpp"

#include <cmath>
#include <deque>

namespace lindstab {

namespace {

struct PairJump {
  int from, to;  // two-bit local index 2·s_k + s_{k+1}
  double rate;
};

// Jumps on bond (k, k+1) in 0-based labels.
std::vector<PairJump> appendix_bond_jumps(int N, int k, bool third) {
  if (k % 2 == 0) {
    std::vector<PairJump> j{{0b00, 0b01, 1.0}, {0b11, 0b01, 1.0}};
    if (third) j.push_back({0b10, 0b01, 2.0 / (3.0 * N)});
    return j;
  }
  return {{0b00, 0b10, 1.0}, {0b11, 0b10, 1.0}};
}

SuperOp dephasing(double gamma) { return schur_multiplier(hamming_dephasing_coeffs(1, gamma)); }

Mat swap4() {
  Mat S = Mat::Zero(4, 4);
  S(0, 0) = S(3, 3) = 1;
  S(1, 2) = S(2, 1) = 1;
  return S;
}

double model_norm1(const Model& m) {
  double s = 0.0;
  for (const LocalTerm& t : m.terms) {
    const RMat a = t.generator.matrix.cwiseAbs();
    s += std::max(a.colwise().sum().maxCoeff(), a.rowwise().sum().maxCoeff());
  }
  return s;
}

// Dense classical generators are kept to 2^12 configurations (128 MB).
Index pair_chain_states(int N) {
  if (N < 1) throw DomainError("N must be positive");
  if (2 * N > 12) throw ResourceError("dense classical generator limited to 12 spins");
  return Index(1) << (2 * N);
}

Vec heisenberg_step(const Model& m, double nrm, const Vec& y, double dt) {
  const Index n = m.hilbert_dim();
  auto op = [&](const Vec& v) { return Vec(vec(apply_generator_dual(m, unvec(v, n)))); };
  return expm_action(op, nrm, y, dt);
}

}  // namespace

std::string to_string(ExampleId id) {
  switch (id) {
    case ExampleId::amplitude_damping: return "amplitude-damping";
    case ExampleId::four_level: return "four-level";
    case ExampleId::appendix_chain: return "appendix-chain";
  }
  return "?";
}

ExampleId example_from_string(const std::string& s) {
  for (ExampleId id : {ExampleId::amplitude_damping, ExampleId::four_level, ExampleId::appendix_chain})
    if (to_string(id) == s) return id;
  throw DomainError("unknown example: " + s);
}

std::string to_string(FourLevelVariant v) {
  switch (v) {
    case FourLevelVariant::base: return "base";
    case FourLevelVariant::plus_E: return "+E";
    case FourLevelVariant::plus_E_dagger: return "+E-dagger";
  }
  return "?";
}

std::string to_string(AppendixVariant v) {
  switch (v) {
    case AppendixVariant::classical: return "classical";
    case AppendixVariant::embedded: return "embedded";
    case AppendixVariant::embedded_without_third: return "embedded-without-third";
  }
  return "?";
}

Vec alpha0(double epsilon) {
  Vec a(2);
  a << std::sqrt(1 - epsilon * epsilon), epsilon;
  return a;
}

ExamplePair amplitude_damping(int N, double epsilon) {
  if (N < 1) throw DomainError("N must be positive");
  if (!(std::abs(epsilon) <= 1.0)) throw DomainError("|epsilon| must be at most 1");
  const Vec a0 = alpha0(epsilon);
  Vec a1(2);
  a1 << -epsilon, std::sqrt(1 - epsilon * epsilon);
  const SuperOp base = from_gkls(Mat::Zero(2, 2), {ket_bra(2, 0, 1)});
  const SuperOp rot = from_gkls(Mat::Zero(2, 2), {a0 * a1.adjoint()});
  const Geometry g = Geometry::chain(N);
  ExamplePair p{{g, full_region(g), 2, {}}, {g, full_region(g), 2, {}}};
  for (const Site& x : p.base.region) {
    p.base.terms.push_back({x, 0, {x}, base, false});
    p.perturbed.terms.push_back({x, 0, {x}, rot, false});
  }
  return p;
}

SuperOp four_level_site() {
  return from_gkls(Mat::Zero(4, 4), {ket_bra(4, 0, 1), ket_bra(4, 0, 3), ket_bra(4, 2, 1), ket_bra(4, 2, 3)});
}

Model four_level(int N, FourLevelVariant v) {
  if (N < 1) throw DomainError("N must be positive");
  const Geometry g = Geometry::chain(N, true);
  Model m{g, full_region(g), 4, {}};
  const SuperOp L0 = four_level_site();
  const double c = std::sqrt(2.0 / N);
  SuperOp E;
  if (v == FourLevelVariant::plus_E) E = from_gkls(Mat::Zero(4, 4), {c * ket_bra(4, 0, 2)});
  if (v == FourLevelVariant::plus_E_dagger) E = from_gkls(Mat::Zero(4, 4), {c * ket_bra(4, 2, 0)});
  for (const Site& x : m.region) {
    m.terms.push_back({x, 0, {x}, L0, false});
    if (v != FourLevelVariant::base) m.terms.push_back({x, 0, {x}, E, false});
  }
  return m;
}

Model appendix_chain(int N, AppendixVariant v, double gamma) {
  if (N < 1) throw DomainError("N must be positive");
  if (v == AppendixVariant::classical)
    throw DomainError("the classical variant is a Markov generator; use appendix_generator");
  const int n = 2 * N;
  const Geometry g = Geometry::chain(n, true);
  Model m{g, full_region(g), 2, {}};
  const bool third = v == AppendixVariant::embedded;
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    std::vector<Mat> jumps;
    for (const PairJump& j : appendix_bond_jumps(N, k, third)) {
      Mat J = std::sqrt(j.rate) * ket_bra(4, j.to, j.from);
      // the wrap bond is stored in canonical site order (k + 1, k)
      if (k1 < k) J = swap4() * J * swap4();
      jumps.push_back(J);
    }
    const std::vector<Site> supp = k1 < k ? std::vector<Site>{{k1}, {k}} : std::vector<Site>{{k}, {k1}};
    m.terms.push_back({{k}, 1, supp, from_gkls(Mat::Zero(4, 4), jumps), false});
  }
  if (gamma != 0.0)
    for (int k = 0; k < n; ++k) m.terms.push_back({{k}, 0, {{k}}, dephasing(gamma), false});
  return m;
}

RMat appendix_generator(int N) {
  const int n = 2 * N;
  const Index m = pair_chain_states(N);
  RMat Q = RMat::Zero(m, m);
  auto bit = [n](Index x, int k) { return int((x >> (n - 1 - k)) & 1); };
  for (Index x = 0; x < m; ++x)
    for (int k = 0; k < n; ++k) {
      const int k1 = (k + 1) % n;
      const int local = 2 * bit(x, k) + bit(x, k1);
      for (const PairJump& j : appendix_bond_jumps(N, k, true)) {
        if (j.from != local) continue;
        Index y = x;
        if (((j.from ^ j.to) & 2) != 0) y ^= Index(1) << (n - 1 - k);
        if (((j.from ^ j.to) & 1) != 0) y ^= Index(1) << (n - 1 - k1);
        Q(y, x) += j.rate;
        Q(x, x) -= j.rate;
      }
    }
  return Q;
}

std::vector<Index> appendix_pair_order(int N) {
  static const int code[4] = {0b10, 0b00, 0b11, 0b01};
  const Index m = pair_chain_states(N);
  std::vector<Index> perm(m);
  for (Index p = 0; p < m; ++p) {
    Index x = 0;
    for (int i = 0; i < N; ++i) x = 4 * x + code[(p >> (2 * (N - 1 - i))) & 3];
    perm[p] = x;
  }
  return perm;
}

Index appendix_configuration(int N, const std::string& pair) {
  if (pair.size() != 2 || (pair[0] != '0' && pair[0] != '1') || (pair[1] != '0' && pair[1] != '1'))
    throw DomainError("pair must be a two-character bit string");
  const Index code = 2 * (pair[0] - '0') + (pair[1] - '0');
  Index x = 0;
  for (int i = 0; i < N; ++i) x = 4 * x + code;
  return x;
}

int transition_graph_diameter(const RMat& Q) {
  const Index m = Q.rows();
  std::vector<std::vector<Index>> out(m);
  for (Index s = 0; s < m; ++s)
    for (Index t = 0; t < m; ++t)
      if (t != s && Q(t, s) > 0.0) out[s].push_back(t);
  int diam = 0;
  std::vector<int> dist(m);
  for (Index s = 0; s < m; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<Index> q{s};
    dist[s] = 0;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop_front();
      diam = std::max(diam, dist[u]);
      for (Index w : out[u])
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push_back(w);
        }
    }
  }
  return diam;
}

Model expand(const ExampleHandle& h) {
  switch (h.id) {
    case ExampleId::amplitude_damping: return amplitude_damping(h.N, h.epsilon).perturbed;
    case ExampleId::four_level: return four_level(h.N, h.four);
    case ExampleId::appendix_chain: return appendix_chain(h.N, h.appendix, h.gamma);
  }
  throw DomainError("unknown example");
}

Mat heisenberg_evolve(const Model& m, const Mat& X, double t) {
  if (t < 0) throw DomainError("t must be nonnegative");
  return unvec(heisenberg_step(m, model_norm1(m), vec(X), t), m.hilbert_dim());
}

Mat heisenberg_limit(const Model& m, const Mat& X, double t_start, double t_max, double tol) {
  const double nrm = model_norm1(m);
  const Index n = m.hilbert_dim();
  Vec y = heisenberg_step(m, nrm, vec(X), t_start);
  double t = t_start, step = t_start;
  while (t < t_max) {
    const Vec z = heisenberg_step(m, nrm, y, step);
    t += step;
    const double diff = (z - y).norm();
    y = z;
    if (diff <= tol * std::max(1.0, y.norm())) return unvec(y, n);
    step *= 2;
  }
  throw ConditioningError("Heisenberg evolution did not settle");
}

DeviationSeries observable_deviation(const Model& base, const Model& perturbed, const Mat& O_A,
                                     const Region& a, const std::vector<double>& t_grid) {
  if (!(base.region == perturbed.region) || base.local_dim != perturbed.local_dim)
    throw DomainError("models must share their labels");
  if (!a.subset_of(base.region)) throw DomainError("observable support outside the model");
  const Index dA = O_A.rows();
  Index want = 1;
  for (std::size_t i = 0; i < a.size(); ++i) want *= base.local_dim;
  if (dA != want || O_A.cols() != want) throw DomainError("observable does not match its support");

  std::vector<int> keep;
  for (const Site& x : a) keep.push_back(int(base.region.index_of(x)));
  const std::vector<Index> dims(base.region.size(), base.local_dim);
  const Mat O = embed_operator(O_A, dims, keep);
  const Index n = O.rows();
  const double n0 = model_norm1(base), n1 = model_norm1(perturbed);

  DeviationSeries s;
  Vec y0 = vec(O), y1 = vec(O);
  double t_prev = 0.0;
  for (double t : t_grid) {
    Mat diff;
    if (std::isinf(t)) {
      diff = heisenberg_limit(base, O) - heisenberg_limit(perturbed, O);
    } else {
      if (t < t_prev) throw DomainError("time grid must be nondecreasing");
      if (t > t_prev) {
        y0 = heisenberg_step(base, n0, y0, t - t_prev);
        y1 = heisenberg_step(perturbed, n1, y1, t - t_prev);
        t_prev = t;
      }
      diff = unvec(Vec(y0 - y1), n);
    }
    const double v = operator_norm(diff);
    s.points.push_back({t, v});
    s.sup = std::max(s.sup, v);
  }
  return s;
}

}  // namespace lindstab
