#include "lindstab/model.hpp"

#include "lindstab/dynamics.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <array>
#include <map>

namespace lindstab {

double DecayProfile::operator()(double r) const {
  switch (kind) {
    case Kind::finite_range:
      return r <= param ? 1.0 : 0.0;
    case Kind::exponential:
      return std::exp(-param * r);
    case Kind::quasi_local:
      return std::exp(-param * std::sqrt(r));
    case Kind::power:
      return std::pow(1.0 + r, -param);
  }
  return 0.0;
}

std::string to_string(DecayProfile::Kind k) {
  switch (k) {
    case DecayProfile::Kind::finite_range:
      return "finite_range";
    case DecayProfile::Kind::exponential:
      return "exponential";
    case DecayProfile::Kind::quasi_local:
      return "quasi_local";
    case DecayProfile::Kind::power:
      return "power";
  }
  return "?";
}

Index Model::hilbert_dim() const {
  Index d = 1;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (d > (Index(1) << 40) / local_dim) throw ResourceError("Hilbert space too large");
    d *= local_dim;
  }
  return d;
}

namespace {

// Index bookkeeping for a subset of tensor factors placed inside a region.
struct Layout {
  Index local = 1, rest = 1;
  std::vector<Index> keep_of, rest_of;
  std::vector<Index> global;  // global[rest * local + keep]
};

Layout make_layout(const std::vector<Site>& support, const Region& region, int d) {
  const int n = int(region.size());
  std::vector<int> pos;
  std::vector<bool> in_support(n, false);
  for (const Site& s : support) {
    long p = region.index_of(s);
    if (p < 0) throw DomainError("term support is not inside the region");
    if (in_support[p]) throw DomainError("term support has repeated sites");
    in_support[p] = true;
    pos.push_back(int(p));
  }
  Layout L;
  Index D = 1;
  for (int k = 0; k < n; ++k) D *= d;
  for (std::size_t k = 0; k < pos.size(); ++k) L.local *= d;
  L.rest = D / L.local;
  L.keep_of.resize(D);
  L.rest_of.resize(D);
  L.global.resize(D);
  std::vector<int> digit(n, 0);
  for (Index i = 0; i < D; ++i) {
    Index ki = 0, ri = 0;
    for (int p : pos) ki = ki * d + digit[p];
    for (int k = 0; k < n; ++k)
      if (!in_support[k]) ri = ri * d + digit[k];
    L.keep_of[i] = ki;
    L.rest_of[i] = ri;
    L.global[ri * L.local + ki] = i;
    for (int k = n - 1; k >= 0; --k) {
      if (++digit[k] < d) break;
      digit[k] = 0;
    }
  }
  return L;
}

void embed_into(Mat& out, const Mat& M, const Layout& L) {
  const Index D = Index(L.keep_of.size()), dl = L.local;
  for (Index cq = 0; cq < D; ++cq)
    for (Index rq = 0; rq < D; ++rq) {
      const Index q = cq * D + rq;
      const Index kq = L.keep_of[cq] * dl + L.keep_of[rq];
      const Index rr = L.rest_of[rq], rc = L.rest_of[cq];
      for (Index kc = 0; kc < dl; ++kc)
        for (Index kr = 0; kr < dl; ++kr) {
          const cplx v = M(kc * dl + kr, kq);
          if (v == cplx(0.0)) continue;
          const Index r = L.global[rr * dl + kr], c = L.global[rc * dl + kc];
          out(c * D + r, q) += v;
        }
    }
}

void apply_into(Mat& Y, const Mat& M, const Layout& L, const Mat& X) {
  const Index dl = L.local, R = L.rest;
  Mat S(dl * dl, R * R);
  for (Index rb = 0; rb < R; ++rb)
    for (Index ra = 0; ra < R; ++ra) {
      const Index col = rb * R + ra;
      for (Index j = 0; j < dl; ++j)
        for (Index i = 0; i < dl; ++i)
          S(j * dl + i, col) = X(L.global[ra * dl + i], L.global[rb * dl + j]);
    }
  Mat T = M * S;
  for (Index rb = 0; rb < R; ++rb)
    for (Index ra = 0; ra < R; ++ra) {
      const Index col = rb * R + ra;
      for (Index j = 0; j < dl; ++j)
        for (Index i = 0; i < dl; ++i)
          Y(L.global[ra * dl + i], L.global[rb * dl + j]) += T(j * dl + i, col);
    }
}

std::vector<Site> wrapped_support(const Geometry& g, const std::vector<Site>& support) {
  std::vector<Site> out;
  for (const Site& s : support) out.push_back(g.wrap(s));
  std::vector<Site> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DomainError("term support collapses under wrapping");
  return out;
}

bool fits_open(const Geometry& g, const Region& lambda, const LocalTerm& t, const Site& u) {
  for (const Site& s : t.support)
    if (!g.in_range(g.wrap(s)) || !lambda.contains(g.wrap(s))) return false;
  return ball(g, u, t.radius).subset_of(lambda);
}

struct Box {
  std::vector<int> lo, hi;
};

Box bounding_box(const Region& lambda, int dim) {
  Box b{std::vector<int>(dim, INT_MAX), std::vector<int>(dim, INT_MIN)};
  for (const Site& x : lambda)
    for (int k = 0; k < dim; ++k) {
      b.lo[k] = std::min(b.lo[k], x[k]);
      b.hi[k] = std::max(b.hi[k], x[k]);
    }
  return b;
}

// Depth of x in the box when the box is viewed inside Z^D.
int box_depth(const Box& b, const Site& x) {
  int d = INT_MAX;
  for (std::size_t k = 0; k < x.size(); ++k)
    d = std::min({d, x[k] - b.lo[k] + 1, b.hi[k] - x[k] + 1});
  return d;
}

struct ClosedTerm {
  LocalTerm term;
  bool in_open = false;
};

std::vector<ClosedTerm> periodic_terms(const UniformFamily& fam, const Geometry& g,
                                       const Region& lambda) {
  if (lambda.empty()) return {};
  Box b = bounding_box(lambda, g.dim);
  std::size_t count = 1;
  std::vector<int> ext(g.dim);
  for (int k = 0; k < g.dim; ++k) {
    ext[k] = b.hi[k] - b.lo[k] + 1;
    count *= std::size_t(ext[k]);
  }
  if (count != lambda.size()) throw DomainError("periodic boundary rule needs a box region");
  std::vector<ClosedTerm> out;
  for (const Site& u : lambda)
    for (LocalTerm t : fam.bulk(u)) {
      ClosedTerm c;
      c.in_open = fits_open(g, lambda, t, u);
      std::vector<Site> sup;
      for (Site s : t.support) {
        s = g.wrap(s);
        for (int k = 0; k < g.dim; ++k) {
          int m = (s[k] - b.lo[k]) % ext[k];
          s[k] = b.lo[k] + (m < 0 ? m + ext[k] : m);
        }
        sup.push_back(std::move(s));
      }
      std::vector<Site> sorted = sup;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DomainError("torus too small for a bulk term");
      t.support = std::move(sup);
      c.term = std::move(t);
      out.push_back(std::move(c));
    }
  return out;
}

}  // namespace

static void check_term_dims(const LocalTerm& t, int local_dim) {
  Index want = 1;
  for (std::size_t k = 0; k < t.support.size(); ++k) want *= local_dim;
  if (t.generator.dim() != want) throw DomainError("term generator does not match its support");
}

SuperOp generator(const Model& m) {
  const Index D = m.hilbert_dim();
  check_superop_dim(D);
  Mat out = Mat::Zero(D * D, D * D);
  for (const LocalTerm& t : m.terms) {
    check_term_dims(t, m.local_dim);
    embed_into(out, t.generator.matrix, make_layout(t.support, m.region, m.local_dim));
  }
  return SuperOp(std::move(out));
}

Mat apply_generator(const Model& m, const Mat& X) {
  const Index D = m.hilbert_dim();
  if (X.rows() != D || X.cols() != D) throw DomainError("operator dimension mismatch");
  Mat Y = Mat::Zero(D, D);
  for (const LocalTerm& t : m.terms)
    apply_into(Y, t.generator.matrix, make_layout(t.support, m.region, m.local_dim), X);
  return Y;
}

Mat apply_generator_dual(const Model& m, const Mat& X) {
  const Index D = m.hilbert_dim();
  if (X.rows() != D || X.cols() != D) throw DomainError("operator dimension mismatch");
  Mat Y = Mat::Zero(D, D);
  for (const LocalTerm& t : m.terms)
    apply_into(Y, dual(t.generator).matrix, make_layout(t.support, m.region, m.local_dim), X);
  return Y;
}

SuperOp embed_superop(const SuperOp& local, const std::vector<Site>& support, const Region& region,
                      int local_dim) {
  Layout L = make_layout(support, region, local_dim);
  const Index D = Index(L.keep_of.size());
  if (local.dim() != L.local) throw DomainError("local map does not match its support");
  check_superop_dim(D);
  Mat out = Mat::Zero(D * D, D * D);
  embed_into(out, local.matrix, L);
  return SuperOp(std::move(out));
}

Mat apply_local(const SuperOp& local, const std::vector<Site>& support, const Region& region,
                int local_dim, const Mat& X) {
  Layout L = make_layout(support, region, local_dim);
  if (local.dim() != L.local) throw DomainError("local map does not match its support");
  Mat Y = Mat::Zero(X.rows(), X.cols());
  apply_into(Y, local.matrix, L, X);
  return Y;
}

Model build_open(const UniformFamily& fam, const Geometry& g, const Region& lambda) {
  Model m{g, lambda, fam.local_dim, {}};
  for (const Site& u : lambda) {
    if (!g.in_range(u)) throw DomainError("region not inside geometry");
    for (LocalTerm t : fam.bulk(u)) {
      if (!fits_open(g, lambda, t, u)) continue;
      t.support = wrapped_support(g, t.support);
      m.terms.push_back(std::move(t));
    }
  }
  return m;
}

SuperOp assemble_open(const UniformFamily& fam, const Geometry& g, const Region& lambda) {
  return generator(build_open(fam, g, lambda));
}

Model truncate(const UniformFamily& fam, const Geometry& g, const Region& a) {
  return build_open(fam, g, a);
}

std::vector<BoundaryTerm> boundary_condition(const UniformFamily& fam, const Geometry& g,
                                             const Region& lambda) {
  std::vector<BoundaryTerm> out;
  switch (fam.boundary) {
    case BoundaryRule::open:
      break;
    case BoundaryRule::periodic: {
      Box b = bounding_box(lambda, g.dim);
      for (ClosedTerm& c : periodic_terms(fam, g, lambda)) {
        if (c.in_open) continue;
        int d = 0;
        for (const Site& s : c.term.support) d = std::max(d, box_depth(b, s));
        out.push_back({d, std::move(c.term)});
      }
      break;
    }
    case BoundaryRule::custom: {
      if (!fam.custom_boundary) throw DomainError("custom boundary rule without a hook");
      for (LocalTerm& t : fam.custom_boundary(g, lambda)) {
        int d = 0;
        for (const Site& s : t.support) {
          int dx = depth(g, lambda, g.wrap(s));
          d = std::max(d, dx == INT_MAX ? 0 : dx);
        }
        out.push_back({d, std::move(t)});
      }
      break;
    }
  }
  return out;
}

Model build_closed(const UniformFamily& fam, const Geometry& g, const Region& lambda) {
  Model m = build_open(fam, g, lambda);
  for (BoundaryTerm& b : boundary_condition(fam, g, lambda)) m.terms.push_back(std::move(b.term));
  return m;
}

SuperOp assemble_closed(const UniformFamily& fam, const Geometry& g, const Region& lambda) {
  return generator(build_closed(fam, g, lambda));
}

std::vector<BoundaryAudit> audit_boundary(const UniformFamily& fam, const Geometry& g,
                                          const Region& lambda) {
  std::map<int, double> norms;
  EstimatorOptions opt;
  opt.restarts = 8;
  for (const BoundaryTerm& b : boundary_condition(fam, g, lambda))
    norms[b.depth] += diamond_norm_estimate(b.term.generator, opt).value;
  Box box = bounding_box(lambda, g.dim);
  std::vector<BoundaryAudit> out;
  for (auto [d, n] : norms) {
    std::size_t layer = 0;
    for (const Site& x : lambda)
      if (box_depth(box, x) <= d) ++layer;
    BoundaryAudit a;
    a.depth = d;
    a.norm_bound = n;
    a.budget = fam.J * double(layer) * fam.profile(d);
    a.ok = n <= a.budget * (1 + 1e-9) + 1e-12;
    out.push_back(a);
  }
  return out;
}

Model perturbed_model(const Model& base, const Perturbation& p) {
  Model m = base;
  for (LocalTerm t : p.terms) {
    const double scale = std::max(1.0, t.generator.matrix.cwiseAbs().maxCoeff());
    const Index d = t.generator.dim();
    Eigen::RowVectorXcd tr = Eigen::RowVectorXcd::Zero(d * d);
    for (Index i = 0; i < d; ++i) tr += t.generator.matrix.row(i * d + i);
    if (tr.size() && tr.cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw ValidationError("perturbation term is not trace annihilating");
    t.generator = p.epsilon * t.generator;
    t.perturbation_only = true;
    t.support = wrapped_support(base.geometry, t.support);
    m.terms.push_back(std::move(t));
  }
  return m;
}

PerturbedGenerator apply_perturbation(const Model& base, const Perturbation& p,
                                      bool probe_contractivity) {
  Model m = perturbed_model(base, p);
  PerturbedGenerator out{generator(m), {}};
  if (probe_contractivity) {
    for (double t : {0.1, 1.0, 10.0}) {
      SuperOp P = expm(out.generator, t);
      if (!is_completely_positive(P))
        out.warnings.push_back("exp(tL) not completely positive at t=" + std::to_string(t));
      if (!is_trace_preserving(P, 1e-8))
        out.warnings.push_back("exp(tL) not trace preserving at t=" + std::to_string(t));
    }
  }
  return out;
}

namespace {

// Least-squares fit y ≈ c + s·x; returns {c, s, rms residual}.
std::array<double, 3> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i];
    b(i) = y[i];
  }
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((A * c - b).squaredNorm() / double(n));
  return {c(0), c(1), rms};
}

}  // namespace

StrengthEstimate strength_estimate(const UniformFamily& fam, const Site& sample_site,
                                   int sample_radius, const EstimatorOptions& opt) {
  StrengthEstimate out;
  std::vector<double> per_radius(sample_radius + 1, 0.0);
  for (const LocalTerm& t : fam.bulk(sample_site)) {
    if (t.radius > sample_radius) continue;
    const double n = diamond_norm_estimate(t.generator, opt).value;
    per_radius[t.radius] = std::max(per_radius[t.radius], n);
    out.J = std::max(out.J, n);
  }
  out.f.assign(sample_radius + 1, 0.0);
  if (out.J <= 0) {
    out.profile = DecayProfile::finite_range(0);
    return out;
  }
  int R = 0;
  for (int r = 0; r <= sample_radius; ++r) {
    out.f[r] = per_radius[r] / out.J;
    if (out.f[r] > 1e-12) R = r;
  }
  std::vector<double> rs, logs;
  for (int r = 0; r <= sample_radius; ++r)
    if (out.f[r] > 1e-12) {
      rs.push_back(r);
      logs.push_back(std::log(out.f[r]));
    }
  if (R < sample_radius || rs.size() < 3) {
    out.profile = DecayProfile::finite_range(R);
    return out;
  }
  std::vector<double> xp, xq;
  for (double r : rs) {
    xp.push_back(std::log1p(r));
    xq.push_back(std::sqrt(r));
  }
  auto e = line_fit(rs, logs);
  auto p = line_fit(xp, logs);
  auto q = line_fit(xq, logs);
  out.profile = DecayProfile::exponential(-e[1]);
  out.residual = e[2];
  if (p[2] < out.residual) {
    out.profile = DecayProfile::power(-p[1]);
    out.residual = p[2];
  }
  if (q[2] < out.residual) {
    out.profile = DecayProfile::quasi_local(-q[1]);
    out.residual = q[2];
  }
  return out;
}

}  // namespace lindstab
