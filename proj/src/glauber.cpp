#include "lindstab/glauber.hpp"

#include "lindstab/correlations.hpp"
#include "lindstab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lindstab {

namespace {

Index table_index(const std::vector<int>& sites, const Spins& s) {
  Index i = 0;
  for (int p : sites) i = 2 * i + s[p];
  return i;
}

int sup_distance(const Site& a, const Site& b) {
  int d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

std::vector<int> positions(const GlauberRates& rates, const Region& r) {
  std::vector<int> p;
  for (const Site& x : r) {
    const long i = rates.sites().index_of(rates.geometry().wrap(x));
    if (i < 0) throw DomainError("site outside the geometry");
    p.push_back(int(i));
  }
  return p;
}

Index read_configuration(const std::vector<int>& pos, const Spins& s) {
  Index i = 0;
  for (int p : pos) i = 2 * i + s[p];
  return i;
}

void write_digits(const std::vector<int>& pos, Index index, Spins& s) {
  const std::size_t k = pos.size();
  for (std::size_t j = 0; j < k; ++j) s[pos[j]] = int((index >> (k - 1 - j)) & 1);
}

SuperOp dephasing_site(double gamma) { return schur_multiplier(hamming_dephasing_coeffs(1, gamma)); }

// Embedding terms for x ∈ Λ on `labels`, spins outside `labels` taken from `base`.
Model build_embedding(const GlauberRates& rates, const Region& lambda, const Region& labels,
                      Spins base, double gamma) {
  Model m{rates.geometry(), labels, 2, {}};
  const std::vector<int> lam_pos = positions(rates, lambda);
  std::set<int> in_labels;
  for (int p : positions(rates, labels)) in_labels.insert(p);
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const int x = lam_pos[k];
    std::vector<int> supp;
    for (int p : rates.neighbourhood(x))
      if (in_labels.count(p)) supp.push_back(p);
    const Index d = Index(1) << supp.size();
    const Index flip = Index(1) << (supp.size() - 1 - (std::find(supp.begin(), supp.end(), x) - supp.begin()));
    std::vector<Mat> jumps;
    Spins s = base;
    for (Index eta = 0; eta < d; ++eta) {
      write_digits(supp, eta, s);
      jumps.push_back(std::sqrt(rates.rate(x, s)) * ket_bra(d, eta ^ flip, eta));
    }
    std::vector<Site> support;
    for (int p : supp) support.push_back(rates.sites()[p]);
    m.terms.push_back({lambda[k], rates.potential().range, support, from_gkls(Mat::Zero(d, d), jumps), false});
  }
  if (gamma != 0.0)
    for (const Site& x : lambda) m.terms.push_back({x, 0, {x}, dephasing_site(gamma), false});
  return m;
}

RMat real_expm(const RMat& A, double t) { return expm(Mat((t * A).cast<cplx>())).real(); }

}  // namespace

std::string to_string(RateFamily f) {
  switch (f) {
    case RateFamily::heat_bath: return "heat-bath";
    case RateFamily::metropolis: return "metropolis";
    case RateFamily::custom: return "custom";
  }
  return "?";
}

Potential ising_potential(int D, double J, double h) {
  Potential p;
  p.range = 1;
  const Site o(D, 0);
  for (int k = 0; k < D; ++k) {
    Site e = o;
    e[k] = 1;
    p.terms.push_back({{o, e}, {J, -J, -J, J}});
  }
  if (h != 0.0) p.terms.push_back({{o}, {h, -h}});
  return p;
}

void validate(const Potential& pot) {
  if (pot.range < 1) throw DomainError("potential range must be positive");
  for (const PotentialTerm& t : pot.terms) {
    if (t.sites.empty()) throw DomainError("potential term without sites");
    if (t.sites.size() > 20 || t.table.size() != (std::size_t(1) << t.sites.size()))
      throw DomainError("potential table must have 2^|A| entries");
    for (const Site& a : t.sites)
      for (const Site& b : t.sites)
        if (sup_distance(a, b) > pot.range) throw DomainError("potential term wider than its range");
  }
}

GlauberRates::GlauberRates(RateFamily family, Potential pot, Geometry g, CustomRate custom)
    : family_(family), pot_(std::move(pot)), g_(std::move(g)), all_(full_region(g_)),
      custom_(std::move(custom)) {
  validate(pot_);
  if (family_ == RateFamily::custom && !custom_) throw DomainError("custom rate family needs a rate function");
  if (!pot_.terms.empty() && int(pot_.terms[0].sites[0].size()) != g_.dim)
    throw DomainError("potential dimension does not match the geometry");
  const int n = int(all_.size());
  for (const PotentialTerm& t : pot_.terms) {
    const std::vector<Site> shifts = pot_.translation_invariant ? all_.sites() : std::vector<Site>{Site(g_.dim, 0)};
    for (const Site& x : shifts) {
      std::vector<int> sites;
      bool inside = true;
      for (const Site& a : t.sites) {
        Site y = a;
        for (int k = 0; k < g_.dim; ++k) y[k] += x[k];
        y = g_.wrap(y);
        if (!g_.in_range(y)) {
          inside = false;
          break;
        }
        sites.push_back(int(all_.index_of(y)));
      }
      if (!inside) continue;
      std::vector<int> sorted = sites;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DomainError("potential term wraps onto itself; the periodic extent is too small");
      inst_.push_back({sites, &t.table});
    }
  }
  by_site_.assign(n, {});
  nbhd_.assign(n, {});
  for (std::size_t i = 0; i < inst_.size(); ++i)
    for (int p : inst_[i].sites) by_site_[p].push_back(int(i));
  for (int x = 0; x < n; ++x) {
    std::set<int> u{x};
    for (int i : by_site_[x]) u.insert(inst_[i].sites.begin(), inst_[i].sites.end());
    nbhd_[x].assign(u.begin(), u.end());
  }

  cmin_ = INFINITY;
  cmax_ = 0.0;
  Spins s(n, 0);
  for (int x = 0; x < n; ++x) {
    const std::vector<int>& nb = nbhd_[x];
    if (nb.size() > 20) throw ResourceError("rate neighbourhood too large to enumerate");
    for (Index c = 0; c < (Index(1) << nb.size()); ++c) {
      write_digits(nb, c, s);
      const double r = rate(x, s);
      if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("rates must be positive and finite");
      cmin_ = std::min(cmin_, r);
      cmax_ = std::max(cmax_, r);
    }
    for (int p : nb) s[p] = 0;
  }
}

double GlauberRates::local_coupling(int x, const Spins& s) const {
  double h = 0.0;
  for (int i : by_site_[x]) h += (*inst_[i].table)[table_index(inst_[i].sites, s)];
  return h;
}

double GlauberRates::energy_change(int x, const Spins& s) const {
  Spins f = s;
  f[x] ^= 1;
  return local_coupling(x, s) - local_coupling(x, f);
}

double GlauberRates::rate(int x, const Spins& s) const {
  switch (family_) {
    case RateFamily::heat_bath: return 1.0 / (1.0 + std::exp(energy_change(x, s)));
    case RateFamily::metropolis: return std::min(1.0, std::exp(-energy_change(x, s)));
    case RateFamily::custom: return custom_(x, s);
  }
  return 0.0;
}

double rates_detailed_balance_residual(const GlauberRates& rates) {
  const int n = int(rates.sites().size());
  double worst = 0.0;
  Spins s(n, 0);
  for (int x = 0; x < n; ++x) {
    const std::vector<int>& nb = rates.neighbourhood(x);
    for (Index c = 0; c < (Index(1) << nb.size()); ++c) {
      write_digits(nb, c, s);
      Spins f = s;
      f[x] ^= 1;
      // μ ∝ e^{−H} = e^{Σ J_A}: only the couplings containing x change under the flip
      const double h = rates.local_coupling(x, s), hf = rates.local_coupling(x, f);
      const double top = std::max(h, hf);
      const double a = std::exp(h - top) * rates.rate(x, s), b = std::exp(hf - top) * rates.rate(x, f);
      worst = std::max(worst, std::abs(a - b) / std::max(a, b));
    }
    for (int p : nb) s[p] = 0;
  }
  return worst;
}

Region spin_boundary(const GlauberRates& rates, const Region& lambda) {
  const Geometry& g = rates.geometry();
  std::vector<Site> out;
  for (const Site& y : outer_boundary(g, lambda, rates.potential().range)) {
    const Site w = g.wrap(y);
    if (g.in_range(w) && !lambda.contains(w)) out.push_back(w);
  }
  return Region(out);
}

Index configuration_count(const Region& r) {
  if (r.size() > 20) throw ResourceError("configuration space above the 2^20 enumeration ceiling");
  return Index(1) << r.size();
}

void write_configuration(const GlauberRates& rates, const Region& r, Index index, Spins& s) {
  write_digits(positions(rates, r), index, s);
}

namespace {

struct Enumerator {
  std::vector<int> lam, bnd;
  std::vector<int> touching;  // instances meeting Λ
  Index n_sigma = 0, n_tau = 0;

  Enumerator(const GlauberRates& rates, const Region& lambda) {
    const Region b = spin_boundary(rates, lambda);
    lam = positions(rates, lambda);
    bnd = positions(rates, b);
    n_sigma = configuration_count(lambda);
    n_tau = configuration_count(b);
    const std::set<int> in(lam.begin(), lam.end());
    for (std::size_t i = 0; i < rates.instances().size(); ++i)
      for (int p : rates.instances()[i].sites)
        if (in.count(p)) {
          touching.push_back(int(i));
          break;
        }
  }

  double minus_energy(const GlauberRates& rates, const Spins& s) const {
    double e = 0.0;
    for (int i : touching) {
      const PotentialInstance& a = rates.instances()[i];
      e += (*a.table)[table_index(a.sites, s)];
    }
    return e;
  }

  std::vector<double> gibbs(const GlauberRates& rates, Index tau) const {
    if (tau < 0 || tau >= n_tau) throw DomainError("boundary configuration out of range");
    Spins s(rates.sites().size(), 0);
    write_digits(bnd, tau, s);
    std::vector<double> w(n_sigma);
    double top = -INFINITY;
    for (Index sg = 0; sg < n_sigma; ++sg) {
      write_digits(lam, sg, s);
      w[sg] = minus_energy(rates, s);
      top = std::max(top, w[sg]);
    }
    double z = 0.0;
    for (double& x : w) z += (x = std::exp(x - top));
    for (double& x : w) x /= z;
    return w;
  }
};

RMat build_q(const GlauberRates& rates, const std::vector<int>& labels, const std::vector<int>& movers,
             Spins s, const RatePerturbation* e = nullptr) {
  const std::size_t k = labels.size();
  const Index m = Index(1) << k;
  RMat Q = RMat::Zero(m, m);
  for (Index c = 0; c < m; ++c) {
    write_digits(labels, c, s);
    for (int x : movers) {
      const std::size_t j = std::find(labels.begin(), labels.end(), x) - labels.begin();
      double r = rates.rate(x, s);
      if (e) r += (*e)(x, s);
      if (r < 0.0) throw DomainError("perturbed rate is negative");
      const Index cf = c ^ (Index(1) << (k - 1 - j));
      Q(cf, c) += r;
      Q(c, c) -= r;
    }
  }
  return Q;
}

}  // namespace

double energy(const GlauberRates& rates, const Region& lambda, Index sigma, Index tau) {
  const Enumerator en(rates, lambda);
  if (sigma < 0 || sigma >= en.n_sigma || tau < 0 || tau >= en.n_tau)
    throw DomainError("configuration out of range");
  Spins s(rates.sites().size(), 0);
  write_digits(en.bnd, tau, s);
  write_digits(en.lam, sigma, s);
  return -en.minus_energy(rates, s);
}

std::vector<double> gibbs(const GlauberRates& rates, const Region& lambda, Index tau) {
  return Enumerator(rates, lambda).gibbs(rates, tau);
}

ClassicalGenerator classical_generator(const GlauberRates& rates, const Region& lambda, Index tau) {
  const Enumerator en(rates, lambda);
  if (tau < 0 || tau >= en.n_tau) throw DomainError("boundary configuration out of range");
  Spins s(rates.sites().size(), 0);
  write_digits(en.bnd, tau, s);
  return {lambda, tau, build_q(rates, en.lam, en.lam, s)};
}

RMat classical_generator_frozen(const GlauberRates& rates, const Region& lambda) {
  const Region labels = region_union(lambda, spin_boundary(rates, lambda));
  configuration_count(labels);
  return build_q(rates, positions(rates, labels), positions(rates, lambda),
                 Spins(rates.sites().size(), 0));
}

Model embed(const GlauberRates& rates, const Region& lambda, Index tau, double gamma) {
  const Enumerator en(rates, lambda);
  if (tau < 0 || tau >= en.n_tau) throw DomainError("boundary configuration out of range");
  Spins s(rates.sites().size(), 0);
  write_digits(en.bnd, tau, s);
  return build_embedding(rates, lambda, lambda, s, gamma);
}

Model embed_frozen(const GlauberRates& rates, const Region& lambda, double gamma) {
  const Region labels = region_union(lambda, spin_boundary(rates, lambda));
  configuration_count(labels);
  return build_embedding(rates, lambda, labels, Spins(rates.sites().size(), 0), gamma);
}

Model dephasing_part(const Model& m, const Region& lambda, double gamma) {
  Model d{m.geometry, m.region, m.local_dim, {}};
  for (const Site& x : lambda) d.terms.push_back({x, 0, {x}, dephasing_site(gamma), false});
  return d;
}

double embedding_residual(const Model& m, const RMat& Q, double t) {
  const Index n = m.hilbert_dim();
  if (Q.rows() != n) throw DomainError("classical generator does not match the model");
  const SuperOp T = expm(generator(m), t);
  const RMat P = real_expm(Q, t);
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Mat out = unvec(Vec(T.matrix.col(i + i * n)), n);
    Mat want = Mat::Zero(n, n);
    want.diagonal() = P.col(i).cast<cplx>();
    worst = std::max(worst, (out - want).cwiseAbs().maxCoeff());
  }
  return worst;
}

double detailed_balance_residual(const SuperOp& L, const std::vector<double>& mu) {
  const Index n = Index(mu.size());
  if (L.matrix.rows() != n * n) throw DomainError("distribution does not match the generator");
  for (double p : mu)
    if (!(p > 0.0)) throw DomainError("detailed balance needs a full-rank distribution");
  Vec g(n * n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i + j * n) = std::sqrt(mu[i] * mu[j]);
  const Mat diff = L.matrix * g.asDiagonal() - g.asDiagonal() * dual(L).matrix;
  return Eigen::BDCSVD<Mat>(diff).singularValues()(0);
}

FixedPointReport fixed_point_set(const GlauberRates& rates, const Region& lambda, double gamma) {
  const Model m = embed_frozen(rates, lambda, gamma);
  const Index n = m.hilbert_dim();
  const AsymptoticProjectors P = asymptotic_projectors(generator(m));
  const Mat& T = P.peripheral.matrix;

  FixedPointReport r;
  r.stationary_dim = P.stationary_dim;
  for (Index c = 0; c < n * n; ++c) {
    const Mat X = unvec(Vec(T.col(c)), n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) r.max_offdiagonal = std::max(r.max_offdiagonal, std::abs(X(i, j)));
  }

  const Enumerator en(rates, lambda);
  const std::vector<int> labels = positions(rates, m.region);
  r.gibbs_count = en.n_tau;
  Mat PG = Mat::Zero(n * n, n * n);
  Spins s(rates.sites().size(), 0);
  for (Index tau = 0; tau < en.n_tau; ++tau) {
    const std::vector<double> mu = en.gibbs(rates, tau);
    Mat omega = Mat::Zero(n, n), proj = Mat::Zero(n, n);
    write_digits(en.bnd, tau, s);
    for (Index sg = 0; sg < en.n_sigma; ++sg) {
      write_digits(en.lam, sg, s);
      const Index c = read_configuration(labels, s);
      omega(c, c) = mu[sg];
      proj(c, c) = 1.0;
    }
    const Mat moved = unvec(Vec(T * vec(omega)), n);
    r.gibbs_residual = std::max(r.gibbs_residual, trace_norm(moved - omega));
    PG += vec(omega) * vec(proj).adjoint();
  }
  const Mat away = T - PG * T;
  const double sv = Eigen::BDCSVD<Mat>(away).singularValues()(0);
  r.hausdorff_bound = std::max(r.gibbs_residual, std::sqrt(double(n)) * sv);
  return r;
}

SplitReport contraction_split_check(const GlauberRates& rates, const Region& lambda, Index tau,
                                    double gamma, const std::vector<double>& t_grid,
                                    const ContractionOptions& opt, double slack) {
  const Model m = embed(rates, lambda, tau, gamma);
  const Index n = m.hilbert_dim();
  const Semigroup gT(generator(m));
  const AsymptoticProjectors PT = asymptotic_projectors(gT.generator());
  const Semigroup gD(generator(dephasing_part(m, lambda, gamma)));
  const AsymptoticProjectors PD = asymptotic_projectors(gD.generator());
  const RMat Q = classical_generator(rates, lambda, tau).matrix;
  const RMat Pc = classical_limit(Q);
  Mat diag_coeffs = Mat::Identity(n, n);
  const SuperOp C = schur_multiplier(diag_coeffs);

  SplitReport rep;
  for (double t : t_grid) {
    SplitRow row;
    row.t = t;
    row.eta_total = contraction(gT, PT, t, opt).value;
    row.eta_dephasing = contraction(gD, PD, t, opt).value;
    const RMat Pt = real_expm(Q, t) - Pc;
    for (Index i = 0; i < n; ++i) row.eta_classical = std::max(row.eta_classical, 0.5 * Pt.col(i).cwiseAbs().sum());
    const Mat Tt = gT.propagator(t).matrix;
    const Mat delta = (Tt - Tt * PT.peripheral.matrix) * C.matrix;
    row.eta_classical_estimate = max_half_trace_norm(delta, n, n, opt).value;
    row.dephasing_envelope = double(lambda.size()) * std::exp(-gamma * t / 2);
    row.holds = row.eta_total <= row.eta_classical + row.eta_dephasing + slack;
    if (!row.holds) ++rep.violations;
    if (row.eta_dephasing > row.dephasing_envelope + slack) ++rep.envelope_violations;
    rep.rows.push_back(row);
  }
  return rep;
}

double weak_mixing_sup(const GlauberRates& rates, const Region& V, const Region& delta) {
  if (!delta.subset_of(V)) throw DomainError("Δ must be a subset of V");
  const Enumerator en(rates, V);
  std::vector<int> at;  // positions of Δ's sites inside V
  for (const Site& x : delta) at.push_back(int(V.index_of(x)));
  const std::size_t k = V.size();
  const Index nd = Index(1) << delta.size();
  std::vector<RVec> marg;
  for (Index tau = 0; tau < en.n_tau; ++tau) {
    const std::vector<double> mu = en.gibbs(rates, tau);
    RVec v = RVec::Zero(nd);
    for (Index sg = 0; sg < en.n_sigma; ++sg) {
      Index y = 0;
      for (int p : at) y = 2 * y + ((sg >> (k - 1 - p)) & 1);
      v(y) += mu[sg];
    }
    marg.push_back(v);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < marg.size(); ++i)
    for (std::size_t j = i + 1; j < marg.size(); ++j) best = std::max(best, (marg[i] - marg[j]).cwiseAbs().sum());
  return best;
}

PerturbedRatesResult perturbed_rates_experiment(const GlauberRates& rates,
                                                const RatePerturbation& e, const Region& lambda,
                                                Index tau, const RVec& f,
                                                const std::vector<double>& t_grid) {
  const Enumerator en(rates, lambda);
  if (tau < 0 || tau >= en.n_tau) throw DomainError("boundary configuration out of range");
  if (f.size() != en.n_sigma) throw DomainError("observable does not match the configuration space");
  Spins s(rates.sites().size(), 0);
  write_digits(en.bnd, tau, s);

  PerturbedRatesResult r;
  for (Index sg = 0; sg < en.n_sigma; ++sg) {
    write_digits(en.lam, sg, s);
    for (int x : en.lam) r.E = std::max(r.E, std::abs(e(x, s)));
  }
  const RMat Q = build_q(rates, en.lam, en.lam, s);
  const RMat S = build_q(rates, en.lam, en.lam, s, &e);
  // functions evolve with the transpose of the measure-side generator
  const RMat Qf = Q.transpose(), Sf = S.transpose();
  for (double t : t_grid) {
    const RVec d = real_expm(Qf, t) * f - real_expm(Sf, t) * f;
    const double dev = d.cwiseAbs().maxCoeff();
    r.rows.push_back({t, dev});
    r.max_deviation = std::max(r.max_deviation, dev);
  }
  return r;
}

}  // namespace lindstab
