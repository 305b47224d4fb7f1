#include "lindstab/correlations.hpp"

#include "lindstab/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lindstab {

namespace {

std::vector<int> positions_in(const Region& labels, const Region& a) {
  std::vector<int> pos;
  for (const Site& s : a) {
    const long i = labels.index_of(s);
    if (i < 0) throw DomainError("region is not inside the system");
    pos.push_back(int(i));
  }
  return pos;
}

Index ipow(Index b, std::size_t e) {
  Index r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

// X_B(b', b) = Σ_{a,a'} M(a, a') Δ((a', b'), (a, b)), so tr[(M ⊗ N)Δ] = tr(N X_B).
Mat contract_A(const Mat& delta, const Mat& M, Index dA, Index dB) {
  Mat X = Mat::Zero(dB, dB);
  for (Index a = 0; a < dA; ++a)
    for (Index ap = 0; ap < dA; ++ap) {
      const cplx m = M(a, ap);
      if (m == cplx(0)) continue;
      X += m * delta.block(ap * dB, a * dB, dB, dB);
    }
  return X;
}

// X_A(a', a) = Σ_{b,b'} N(b, b') Δ((a', b'), (a, b)), so tr[(M ⊗ N)Δ] = tr(M X_A).
Mat contract_B(const Mat& delta, const Mat& N, Index dA, Index dB) {
  Mat X(dA, dA);
  for (Index ap = 0; ap < dA; ++ap)
    for (Index a = 0; a < dA; ++a) X(ap, a) = (N.transpose().cwiseProduct(delta.block(ap * dB, a * dB, dB, dB))).sum();
  return X;
}

// N with ‖N‖ ≤ 1 maximizing |tr(N X)|: V U† for X = U Σ V†.
Mat best_contraction(const Mat& X) {
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().adjoint();
}

double entropy_of(const RVec& ev) {
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 0) s -= ev(i) * std::log(ev(i));
  return s;
}

// Alternating ascent of sup ‖Φ(ρ₁ − ρ₂)‖₁ over states, Φ given by its forward action and
// its adjoint on Hermitian operators.
template <class Fwd, class Adj>
double pair_ascent(const Fwd& fwd, const Adj& adj, Index dA, const LtqoOptions& opt) {
  Rng rng(opt.seed);
  std::vector<Mat> seeds;
  for (Index k = 0; k < dA; ++k) seeds.push_back(2.0 * basis_projector(dA, k) - Mat::Identity(dA, dA));
  std::normal_distribution<double> gauss;
  for (int r = 0; r < opt.restarts; ++r) {
    Mat G(dA, dA);
    for (Index j = 0; j < dA; ++j)
      for (Index i = 0; i < dA; ++i) G(i, j) = cplx(gauss(rng), gauss(rng));
    seeds.push_back(hermitian_sign(hermitian_part(G)));
  }
  double best = 0.0;
  for (Mat W : seeds) {
    double prev = -1.0;
    for (int it = 0; it < opt.max_iter; ++it) {
      Mat Y = hermitian_part(adj(W));
      Eigen::SelfAdjointEigenSolver<Mat> es(Y);
      const Index n = Y.rows();
      Vec p1 = es.eigenvectors().col(n - 1), p2 = es.eigenvectors().col(0);
      Mat D = hermitian_part(fwd(Mat(p1 * p1.adjoint() - p2 * p2.adjoint())));
      const double val = trace_norm(D);
      best = std::max(best, val);
      if (val <= prev + opt.tol) break;
      prev = val;
      W = hermitian_sign(D);
    }
  }
  return std::min(best, 2.0);
}

double superop_norm1(const Model& m) {
  double s = 0.0;
  for (const LocalTerm& t : m.terms) s += t.generator.matrix.cwiseAbs().colwise().sum().maxCoeff();
  return s;
}

// lim exp(tK)X for a generator action K, by time doubling.
template <class Apply>
Mat long_time_limit(const Apply& K, double norm1, const Mat& X, const LtqoOptions& opt) {
  const Index n = X.rows();
  auto op = [&](const Vec& v) { return vec(K(unvec(v, n))); };
  Vec y = vec(X);
  double step = opt.t_start, t = 0.0;
  y = expm_action(op, norm1, y, step);
  t += step;
  while (t < opt.t_max) {
    Vec z = expm_action(op, norm1, y, step);
    t += step;
    const double diff = (z - y).norm();
    y = z;
    if (diff <= opt.converge_tol * std::max(1.0, y.norm())) return unvec(y, n);
    step *= 2;
  }
  throw ConditioningError("periodic projection did not settle; rotating peripheral states?");
}

}  // namespace

Mat BipartiteState::rho_A() const { return partial_trace(rho, {dA, dB}, {0}); }
Mat BipartiteState::rho_B() const { return partial_trace(rho, {dA, dB}, {1}); }
Mat BipartiteState::product() const { return kron(rho_A(), rho_B()); }

BipartiteState make_bipartite(Mat rho, Index dA, Index dB, double tol) {
  if (dA < 1 || dB < 1 || rho.rows() != dA * dB || rho.cols() != dA * dB)
    throw DomainError("bipartite state has the wrong shape");
  if ((rho - rho.adjoint()).norm() > tol) throw DomainError("state is not Hermitian");
  rho = hermitian_part(rho);
  if (std::abs(rho.trace() - cplx(1.0)) > tol) throw DomainError("state is not normalized");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) throw DomainError("state is not positive");
  return {std::move(rho), dA, dB};
}

BipartiteState make_bipartite(const Mat& rho, const Region& labels, int local_dim, const Region& a,
                              const Region& b) {
  if (!region_intersection(a, b).empty()) throw DomainError("A and B overlap");
  if (a.empty() || b.empty()) throw DomainError("empty subsystem");
  const Region c = region_union(a, b);
  Mat rc = partial_trace(rho, labels, local_dim, c);
  // permutation taking C's canonical order to (A sites, B sites)
  std::vector<int> order = positions_in(c, a);
  for (int p : positions_in(c, b)) order.push_back(p);
  const std::size_t k = c.size();
  const Index n = rc.rows();
  std::vector<Index> perm(n);
  for (Index x = 0; x < n; ++x) {
    std::vector<Index> digit(k);
    Index r = x;
    for (std::size_t i = k; i-- > 0;) {
      digit[i] = r % local_dim;
      r /= local_dim;
    }
    Index y = 0;
    for (std::size_t i = 0; i < k; ++i) y = y * local_dim + digit[order[i]];
    perm[x] = y;
  }
  Mat out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(perm[i], perm[j]) = rc(i, j);
  return make_bipartite(out, ipow(local_dim, a.size()), ipow(local_dim, b.size()));
}

double von_neumann_entropy(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
  return entropy_of(es.eigenvalues());
}

double trace_corr(const BipartiteState& s) { return trace_norm(hermitian_part(Mat(s.rho - s.product()))); }

CovarianceResult covariance_corr(const BipartiteState& s, int restarts, std::uint64_t seed) {
  const Mat delta = s.rho - s.product();
  CovarianceResult best;
  best.M = Mat::Identity(s.dA, s.dA);
  best.N = Mat::Identity(s.dB, s.dB);
  std::vector<Mat> starts;
  for (Index k = 0; k < s.dA; ++k) starts.push_back(2.0 * basis_projector(s.dA, k) - Mat::Identity(s.dA, s.dA));
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, std::uint64_t(r)));
    starts.push_back(random_unitary(s.dA, rng));
  }
  for (Mat M : starts) {
    double prev = -1.0;
    Mat N;
    for (int it = 0; it < 500; ++it) {
      N = best_contraction(contract_A(delta, M, s.dA, s.dB));
      const Mat XA = contract_B(delta, N, s.dA, s.dB);
      M = best_contraction(XA);
      const double val = std::abs((M * XA).trace());
      if (val > best.value) {
        best.value = val;
        best.M = M;
        best.N = N;
      }
      if (val <= prev + 1e-14) break;
      prev = val;
    }
  }
  return best;
}

double mutual_info(const BipartiteState& s) {
  const double I =
      von_neumann_entropy(s.rho_A()) + von_neumann_entropy(s.rho_B()) - von_neumann_entropy(s.rho);
  return std::max(0.0, I);
}

FannesCheck fannes_check(const BipartiteState& s, double tol) {
  FannesCheck f;
  const double T = trace_corr(s);
  f.lhs = mutual_info(s);
  f.applicable = T <= 1.0 / (2.0 * std::exp(1.0));
  if (!f.applicable) return f;
  const double D = double(s.dA * s.dB);
  f.rhs = T > 0 ? T * (std::log(D) - std::log(T)) : 0.0;
  f.holds = f.lhs <= f.rhs + tol;
  return f;
}

RMat classical_limit(const RMat& Q, double tol) {
  const Index m = Q.rows();
  const double nrm = Q.cwiseAbs().colwise().sum().maxCoeff();
  if (nrm == 0.0) return RMat::Identity(m, m);
  RMat P = expm(Mat(Q.cast<cplx>() / nrm)).real();
  double prev = INFINITY;
  for (int k = 0; k < 200; ++k) {
    RMat P2 = P * P;
    // keep the columns stochastic so rounding cannot grow under squaring
    P2 = P2.cwiseMax(0.0);
    P2.array().rowwise() /= P2.colwise().sum().array();
    const double d = (P2 - P).cwiseAbs().maxCoeff();
    P = P2;
    if (d <= tol) return P;
    if (d < 1e3 * tol && d >= prev) return P;  // settled at rounding level
    prev = d;
  }
  throw ConditioningError("classical chain did not converge");
}

LtqoResult ltqo_delta_classical(const RMat& Q, const Region& labels, int local_dim,
                                const Region& a) {
  const std::vector<int> pos = positions_in(labels, a);
  const std::size_t k = labels.size();
  const Index m = ipow(local_dim, k);
  if (Q.rows() != m || Q.cols() != m) throw DomainError("classical generator does not match the labels");
  const Index ma = ipow(local_dim, a.size());
  std::vector<Index> to_a(m);
  for (Index x = 0; x < m; ++x) {
    Index y = 0;
    for (int p : pos) y = y * local_dim + (x / ipow(local_dim, k - 1 - p)) % local_dim;
    to_a[x] = y;
  }
  const RMat P = classical_limit(Q);
  std::vector<RVec> marg;
  for (Index i = 0; i < m; ++i) {
    RVec v = RVec::Zero(ma);
    for (Index x = 0; x < m; ++x) v(to_a[x]) += P(x, i);
    bool dup = false;
    for (const RVec& w : marg) dup = dup || (w - v).cwiseAbs().maxCoeff() < 1e-14;
    if (!dup) marg.push_back(v);
  }
  LtqoResult r;
  r.exact = true;
  r.method = "classical";
  for (std::size_t i = 0; i < marg.size(); ++i)
    for (std::size_t j = i + 1; j < marg.size(); ++j)
      r.value = std::max(r.value, (marg[i] - marg[j]).cwiseAbs().sum());
  return r;
}

LtqoResult ltqo_delta(const SuperOp& L, const Region& labels, int local_dim, const Region& a,
                      const LtqoOptions& opt) {
  const Index n = ipow(local_dim, labels.size());
  if (L.matrix.rows() != n * n) throw DomainError("generator does not match the labels");
  if (n > 32) throw ResourceError("dense periodic projection limited to Hilbert dimension 32");
  const AsymptoticProjectors P = asymptotic_projectors(L);
  const Mat& Tphi = P.peripheral.matrix;
  const Mat R = partial_trace_map(labels, local_dim, a);
  const Index dA = ipow(local_dim, a.size());

  bool classical = true;
  for (Index j = 0; j < n && classical; ++j)
    for (Index i = 0; i < n && classical; ++i) {
      const Vec col = Tphi.col(i + j * n);
      if (i != j) {
        classical = col.norm() < 1e-10;
      } else {
        for (Index q = 0; q < n && classical; ++q)
          for (Index p = 0; p < n; ++p)
            if (p != q && std::abs(col(p + q * n)) > 1e-10) {
              classical = false;
              break;
            }
      }
    }

  LtqoResult r;
  if (classical) {
    r.exact = true;
    r.method = "classical";
    std::vector<Mat> red;
    for (Index i = 0; i < n; ++i) red.push_back(unvec(Vec(R * Tphi.col(i + i * n)), dA));
    for (std::size_t i = 0; i < red.size(); ++i)
      for (std::size_t j = i + 1; j < red.size(); ++j)
        r.value = std::max(r.value, trace_norm(hermitian_part(Mat(red[i] - red[j]))));
    return r;
  }
  const Mat Phi = R * Tphi;
  const Mat PhiAdj = Phi.adjoint();
  r.method = "dense";
  r.value = pair_ascent([&](const Mat& X) { return unvec(Vec(Phi * vec(X)), dA); },
                        [&](const Mat& W) { return unvec(Vec(PhiAdj * vec(W)), n); }, dA, opt);
  return r;
}

LtqoResult ltqo_delta(const Model& m, const Region& a, const LtqoOptions& opt) {
  const Index n = m.hilbert_dim();
  if (n <= 32) return ltqo_delta(generator(m), m.region, m.local_dim, a, opt);
  const std::vector<int> pos = positions_in(m.region, a);
  const std::vector<Index> dims(m.region.size(), m.local_dim);
  const Index dA = ipow(m.local_dim, a.size());
  const double nrm = superop_norm1(m);
  auto fwd = [&](const Mat& rho) {
    Mat lim = long_time_limit([&](const Mat& X) { return apply_generator(m, X); }, nrm, rho, opt);
    return partial_trace(lim, m.region, m.local_dim, a);
  };
  auto adj = [&](const Mat& W) {
    return long_time_limit([&](const Mat& X) { return apply_generator_dual(m, X); }, nrm,
                           embed_operator(W, dims, pos), opt);
  };
  LtqoResult r;
  r.method = "matrix-free";
  r.value = pair_ascent(fwd, adj, dA, opt);
  return r;
}

LtqoResult ltqo_delta(const UniformFamily& fam, const Geometry& g, const Region& a, int ell,
                      const LtqoOptions& opt) {
  if (ell < 0) throw DomainError("ell must be >= 0");
  return ltqo_delta(truncate(fam, g, grow(g, a, ell)), a, opt);
}

Indistinguishability fixed_point_indistinguishability(const UniformFamily& fam, const Geometry& g,
                                                      const Region& lambda, const Region& a,
                                                      int s, const Mat& O_A,
                                                      const BoundContext& ctx) {
  if (!a.subset_of(lambda)) throw DomainError("A must lie in the system");
  const Region as = region_intersection(grow(g, a, s), lambda);
  const Mat rho = fixed_point(assemble_closed(fam, g, lambda));
  const Mat rho_s = fixed_point(assemble_closed(fam, g, as));
  const Mat ra = partial_trace(rho, lambda, fam.local_dim, a);
  const Mat rs = partial_trace(rho_s, as, fam.local_dim, a);
  Indistinguishability out;
  out.lhs = std::abs((O_A * (ra - rs)).trace());
  out.rhs = operator_norm(O_A) * std::pow(double(a.size()), ctx.delta) * delta0_envelope(ctx, s);
  return out;
}

std::string to_string(DecayFit::Class c) { return c == DecayFit::Class::exponential ? "exponential" : "power"; }

DecayFit decay_fit(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  if (x.size() != y.size()) throw DomainError("decay_fit needs matching series");
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > floor) {
      xs.push_back(x[i]);
      ls.push_back(std::log(y[i]));
    }
  if (xs.size() < 4) throw DomainError("decay_fit needs at least 4 positive points");
  auto line = [&](const std::vector<double>& u, double& slope, double& icept) {
    const double n = double(u.size());
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
    const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      sxy += (u[i] - mu) * (ls[i] - ml);
      sxx += (u[i] - mu) * (u[i] - mu);
    }
    if (sxx == 0) throw DomainError("decay_fit needs distinct abscissae");
    slope = sxy / sxx;
    icept = ml - slope * mu;
    double rss = 0;
    for (std::size_t i = 0; i < u.size(); ++i) rss += std::pow(ls[i] - icept - slope * u[i], 2);
    return std::sqrt(rss / n);
  };
  std::vector<double> lx(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= -1) throw DomainError("decay_fit needs x > -1");
    lx[i] = std::log1p(xs[i]);
  }
  double se, ie, sp, ip;
  DecayFit f;
  f.exp_residual = line(xs, se, ie);
  f.power_residual = line(lx, sp, ip);
  if (f.exp_residual <= f.power_residual) {
    f.cls = DecayFit::Class::exponential;
    f.rate = -se;
    f.log_prefactor = ie;
    f.residual = f.exp_residual;
  } else {
    f.cls = DecayFit::Class::power;
    f.rate = -sp;
    f.log_prefactor = ip;
    f.residual = f.power_residual;
  }
  return f;
}

}  // namespace lindstab
