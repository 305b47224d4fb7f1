#include "lindstab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace lindstab {

namespace {

constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

double norm1(const Mat& A) { return A.size() ? A.cwiseAbs().colwise().sum().maxCoeff() : 0.0; }

}  // namespace

Mat expm(const Mat& A) {
  const Index n = A.rows();
  if (A.cols() != n) throw DomainError("expm needs a square matrix");
  if (n == 0) return A;
  const double nrm = norm1(A);
  if (!std::isfinite(nrm)) throw DomainError("expm of a non-finite matrix");
  if (nrm == 0.0) return Mat::Identity(n, n);
  int s = 0;
  if (nrm > kTheta13) s = int(std::ceil(std::log2(nrm / kTheta13)));
  const Mat As = A / std::ldexp(1.0, s);
  const auto& b = kPade13;
  const Mat Id = Mat::Identity(n, n);
  const Mat A2 = As * As, A4 = A2 * A2, A6 = A4 * A2;
  Mat U = A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * Id;
  U = As * U;
  Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * Id;
  Mat R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

SuperOp expm(const SuperOp& L, double t) {
  if (t < 0) throw DomainError("negative time");
  const Index n = L.matrix.rows();
  if (t == 0) return SuperOp(Mat::Identity(n, n));
  return SuperOp(expm(Mat(t * L.matrix)));
}

Vec expm_action(const std::function<Vec(const Vec&)>& A, double nrm, const Vec& v, double t,
                double tol) {
  if (t < 0) throw DomainError("negative time");
  const int steps = std::max(1, int(std::ceil(t * nrm)));
  const double h = t / steps;
  Vec x = v;
  for (int s = 0; s < steps; ++s) {
    Vec term = x, sum = x;
    for (int k = 1; k < 80; ++k) {
      term = A(term) * (h / k);
      sum += term;
      if (term.norm() <= tol * sum.norm()) break;
    }
    x = sum;
  }
  return x;
}

Semigroup::Semigroup(SuperOp generator) : L_(std::move(generator)) {}

SuperOp Semigroup::propagator(double t) const {
  if (t < 0) throw DomainError("negative time");
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return *it->second;
  }
  auto P = std::make_shared<const SuperOp>(expm(L_, t));
  std::unique_lock lock(mu_);
  // keep the cache under ~512 MiB
  const double bytes = double(P->matrix.size()) * sizeof(cplx);
  if (bytes * double(cache_.size() + 1) > double(std::size_t(1) << 29)) cache_.clear();
  cache_.emplace(t, P);
  return *P;
}

Mat Semigroup::evolve(double t, const Mat& rho) const {
  const SuperOp P = propagator(t);
  return P(rho);
}

Mat Semigroup::heisenberg(double t, const Mat& O) const {
  const SuperOp P = propagator(t);
  const Index d = P.dim();
  if (O.rows() != d || O.cols() != d) throw DomainError("operator dimension mismatch");
  // dual(P)(O) = (unvec(Pᵀ vec(Oᵀ)))ᵀ
  Mat Ot = O.transpose();
  Vec y = P.matrix.transpose() * vec(Ot);
  return unvec(y, d).transpose();
}

namespace {

double generator_scale(const SuperOp& L) { return std::max(norm1(L.matrix), 1e-300); }

Mat spectral_projector(const Mat& L, cplx lambda, Index mult, double scale) {
  const Index n = L.rows();
  Mat S = L - lambda * Mat::Identity(n, n);
  Eigen::BDCSVD<Mat> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  Index nullity = 0;
  for (Index i = 0; i < n; ++i)
    if (sv(i) < 1e-8 * scale) ++nullity;
  if (nullity != mult)
    throw ConditioningError("peripheral eigenvalue " + std::to_string(lambda.real()) + "+" +
                            std::to_string(lambda.imag()) + "i has algebraic multiplicity " +
                            std::to_string(mult) + " but geometric multiplicity " +
                            std::to_string(nullity));
  Mat R = svd.matrixV().rightCols(mult);
  Mat Lk = svd.matrixU().rightCols(mult);
  Mat G = Lk.adjoint() * R;
  Eigen::FullPivLU<Mat> lu(G);
  if (!lu.isInvertible() || lu.rcond() < 1e-10)
    throw ConditioningError("ill-conditioned left/right eigenbasis pairing");
  return R * lu.solve(Lk.adjoint());
}

}  // namespace

AsymptoticProjectors asymptotic_projectors(const SuperOp& L, double tol) {
  const Index n = L.matrix.rows();
  const Index d = L.dim();
  const double scale = generator_scale(L);
  AsymptoticProjectors out;
  out.tol = tol;
  if (n > 1024) {
    // Too large for a dense eigensolver: assume the peripheral part is the unique fixed point.
    Mat rho = fixed_point(L);
    Vec v = vec(Mat(Mat::Identity(d, d)));
    Mat P = vec(rho) * v.adjoint();
    out.stationary = SuperOp(P);
    out.peripheral = SuperOp(P);
    out.frequencies = {0.0};
    out.stationary_dim = 1;
    return out;
  }
  Eigen::ComplexEigenSolver<Mat> es(L.matrix, false);
  std::vector<cplx> per;
  for (Index i = 0; i < n; ++i) {
    const cplx l = es.eigenvalues()(i);
    if (l.real() > -tol * scale) per.push_back(l);
  }
  if (Index(per.size()) == n) {
    out.peripheral = identity_map(d);
  }
  // cluster the peripheral eigenvalues
  std::sort(per.begin(), per.end(),
            [](cplx a, cplx b) { return a.imag() < b.imag() || (a.imag() == b.imag() && a.real() < b.real()); });
  std::vector<std::pair<cplx, Index>> clusters;
  for (cplx l : per) {
    bool placed = false;
    for (auto& c : clusters)
      if (std::abs(c.first - l) < 1e-6 * scale) {
        c.first = (c.first * double(c.second) + l) / double(c.second + 1);
        ++c.second;
        placed = true;
        break;
      }
    if (!placed) clusters.push_back({l, 1});
  }
  Mat Pphi = Mat::Zero(n, n), Pinf = Mat::Zero(n, n);
  const bool all_peripheral = Index(per.size()) == n;
  for (auto [lambda, mult] : clusters) {
    const bool zero = std::abs(lambda) < tol * scale || std::abs(lambda) < 1e-7 * scale;
    if (zero) lambda = 0.0;
    out.frequencies.push_back(lambda.imag());
    if (all_peripheral && !zero) continue;
    Mat P = spectral_projector(L.matrix, lambda, mult, scale);
    if (zero) {
      Pinf = P;
      out.stationary_dim = mult;
    }
    if (!all_peripheral) Pphi += P;
  }
  out.stationary = SuperOp(Pinf);
  if (!all_peripheral) out.peripheral = SuperOp(Pphi);
  return out;
}

Index stationary_dimension(const SuperOp& L, double tol) {
  Eigen::FullPivLU<Mat> lu(L.matrix);
  lu.setThreshold(tol);
  return lu.dimensionOfKernel();
}

Mat fixed_point(const SuperOp& L) {
  const Index d = L.dim(), n = d * d;
  Vec v = Vec::Zero(n);
  for (Index i = 0; i < d; ++i) v(i * d + i) = 1.0;
  const Vec w = v / double(d);
  Mat B = L.matrix + w * v.adjoint();
  Eigen::PartialPivLU<Mat> lu(B);
  const double rc = lu.rcond();
  Vec x = lu.solve(w);
  const double resid = (L.matrix * x).norm() / std::max(1.0, x.norm());
  if (!(rc > 1e-12) || !(resid < 1e-8 * std::max(1.0, norm1(L.matrix)))) {
    const Index k = stationary_dimension(L);
    if (k != 1) throw UniquenessError("stationary space has dimension " + std::to_string(k), k);
  }
  Mat rho = unvec(x, d);
  rho = hermitian_part(rho);
  return rho / rho.trace().real();
}

double spectral_gap(const SuperOp& L, double tol) {
  const double scale = generator_scale(L);
  Eigen::ComplexEigenSolver<Mat> es(L.matrix, false);
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re < -tol * scale) gap = std::min(gap, -re);
  }
  if (!std::isfinite(gap)) throw DegenerateSpectrumError("no eigenvalue with negative real part");
  return gap;
}

namespace {

struct HalfTraceAscent {
  const Mat& delta;
  Mat delta_adj;
  Index din, dout;

  HalfTraceAscent(const Mat& m, Index i, Index o) : delta(m), delta_adj(m.adjoint()), din(i), dout(o) {}

  Mat image(const Vec& psi) const {
    Vec in = kron(psi.conjugate(), psi);
    return hermitian_part(unvec(Vec(delta * in), dout));
  }

  double value(const Vec& psi) const {
    Eigen::SelfAdjointEigenSolver<Mat> es(image(psi), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }

  double run(Vec& psi, double tol, int max_iter) const {
    double best = -1.0;
    for (int it = 0; it < max_iter; ++it) {
      Eigen::SelfAdjointEigenSolver<Mat> es(image(psi));
      const double val = es.eigenvalues().cwiseAbs().sum();
      if (val <= best + tol * std::max(1.0, val)) break;
      best = val;
      RVec s = es.eigenvalues().unaryExpr([](double l) { return l < 0 ? -1.0 : 1.0; });
      Mat W = es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
      Mat G = hermitian_part(unvec(Vec(delta_adj * vec(W)), din));
      Eigen::SelfAdjointEigenSolver<Mat> eg(G);
      Vec next = eg.eigenvectors().col(din - 1);
      if (eg.eigenvalues()(din - 1) <= val * (1 + 1e-15)) break;
      psi = next;
    }
    return std::max(best, 0.0);
  }
};

std::vector<Vec> state_grid(Index d) {
  std::vector<Vec> out;
  const double pi = std::acos(-1.0);
  if (d == 1) {
    out.push_back(Vec::Ones(1));
  } else if (d == 2) {
    for (int i = 0; i <= 32; ++i)
      for (int j = 0; j < 64; ++j) {
        const double th = pi * i / 32, ph = 2 * pi * j / 64;
        Vec v(2);
        v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
        out.push_back(v);
        if (i == 0 || i == 32) break;
      }
  } else {
    // fixed quasi-uniform cloud, independent of the caller's seed
    Rng rng(0x67726964ULL + std::uint64_t(d));
    for (int k = 0; k < 4096; ++k) out.push_back(random_unit_vector(d, rng));
  }
  return out;
}

}  // namespace

ContractionEstimate max_half_trace_norm(const Mat& delta, Index din, Index dout,
                                        const ContractionOptions& opt) {
  if (delta.rows() != dout * dout || delta.cols() != din * din)
    throw DomainError("map shape does not match the dimensions");
  HalfTraceAscent asc(delta, din, dout);
  ContractionEstimate best;
  best.value = -1.0;
  auto consider = [&](Vec psi) {
    const double v = asc.run(psi, opt.tol, opt.max_iter);
    ++best.restarts;
    if (v > best.value) {
      best.value = v;
      best.maximizer = psi * psi.adjoint();
    }
  };
  for (Index i = 0; i < din; ++i) consider(Vec::Unit(din, i));
  if (din <= 8)
    for (Index i = 0; i < din; ++i)
      for (Index j = i + 1; j < din; ++j) {
        Vec v = (Vec::Unit(din, i) + Vec::Unit(din, j)) / std::sqrt(2.0);
        consider(v);
        v(j) *= I_unit;
        consider(v);
      }
  for (int k = 0; k < opt.restarts; ++k) {
    Rng rng(derive_seed(opt.seed, std::uint64_t(k)));
    consider(random_unit_vector(din, rng));
  }
  if (opt.grid && din <= 4) {
    std::vector<Vec> grid = state_grid(din);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < grid.size(); ++i) scored.push_back({asc.value(grid[i]), i});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; k < std::min<std::size_t>(8, scored.size()); ++k)
      consider(grid[scored[k].second]);
  }
  best.value = std::clamp(0.5 * best.value, 0.0, 1.0);
  return best;
}

ContractionEstimate contraction(const Semigroup& g, const AsymptoticProjectors& P, double t,
                                const ContractionOptions& opt) {
  const SuperOp T = g.propagator(t);
  const Mat delta = T.matrix - T.matrix * P.peripheral.matrix;
  const Index d = T.dim();
  return max_half_trace_norm(delta, d, d, opt);
}

ContractionEstimate contraction(const SuperOp& L, double t, const ContractionOptions& opt) {
  Semigroup g(L);
  return contraction(g, asymptotic_projectors(L), t, opt);
}

Mat partial_trace_map(const Region& labels, int local_dim, const Region& a) {
  if (!a.subset_of(labels)) throw DomainError("region is not inside the system");
  const int n = int(labels.size());
  std::vector<bool> kept(n, false);
  for (const Site& x : a) kept[labels.index_of(x)] = true;
  Index D = 1, dA = 1;
  for (int k = 0; k < n; ++k) {
    D *= local_dim;
    if (kept[k]) dA *= local_dim;
  }
  std::vector<Index> keep_of(D), rest_of(D);
  std::vector<int> digit(n, 0);
  for (Index i = 0; i < D; ++i) {
    Index ki = 0, ri = 0;
    for (int k = 0; k < n; ++k) (kept[k] ? ki : ri) = (kept[k] ? ki : ri) * local_dim + digit[k];
    keep_of[i] = ki;
    rest_of[i] = ri;
    for (int k = n - 1; k >= 0; --k) {
      if (++digit[k] < local_dim) break;
      digit[k] = 0;
    }
  }
  Mat PT = Mat::Zero(dA * dA, D * D);
  for (Index j = 0; j < D; ++j)
    for (Index i = 0; i < D; ++i)
      if (rest_of[i] == rest_of[j]) PT(keep_of[j] * dA + keep_of[i], j * D + i) = 1.0;
  return PT;
}

ContractionEstimate local_contraction(const Semigroup& g, const AsymptoticProjectors& P, double t,
                                      const Region& labels, int local_dim, const Region& a,
                                      const ContractionOptions& opt) {
  const Mat PT = partial_trace_map(labels, local_dim, a);
  const SuperOp T = g.propagator(t);
  const Mat delta = PT * (T.matrix - T.matrix * P.peripheral.matrix);
  const Index dA = Index(std::llround(std::sqrt(double(PT.rows()))));
  return max_half_trace_norm(delta, T.dim(), dA, opt);
}

double mixing_time(const SuperOp& L, double eps, const MixingOptions& opt) {
  if (!(eps > 0 && eps < 1)) throw DomainError("mixing threshold must lie in (0,1)");
  const AsymptoticProjectors P = asymptotic_projectors(L);
  const Index d = L.dim();
  auto eta = [&](double t) {
    const SuperOp T = expm(L, t);
    const Mat delta = T.matrix - T.matrix * P.peripheral.matrix;
    return max_half_trace_norm(delta, d, d, opt.contraction).value;
  };
  const double t0 = 1e-3;
  double prev = 0.0, hit = -1.0;
  for (int k = 0; k < opt.grid_points; ++k) {
    const double t =
        t0 * std::pow(opt.t_max / t0, opt.grid_points > 1 ? double(k) / (opt.grid_points - 1) : 1.0);
    if (eta(t) <= eps) {
      hit = t;
      break;
    }
    prev = t;
  }
  if (hit < 0) throw HorizonError("contraction stays above the threshold up to t_max");
  double lo = prev, hi = hit;
  for (int k = 0; k < opt.bisection_steps && hi - lo > 1e-9 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (eta(mid) <= eps)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

GrmFit fit_grm(const std::vector<GrmSample>& samples, double floor) {
  GrmFit fit;
  fit.samples = samples;
  std::vector<GrmSample> use;
  for (const GrmSample& s : samples)
    if (s.eta > floor) use.push_back(s);
  bool several_sizes = false;
  for (const GrmSample& s : use)
    if (s.size != use.front().size) several_sizes = true;
  if (use.size() < 3) {
    fit.non_mixing = true;
    return fit;
  }
  const Index m = Index(use.size());
  const int cols = several_sizes ? 3 : 2;
  Eigen::MatrixXd A(m, cols);
  Eigen::VectorXd b(m);
  for (Index i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = -use[i].t;
    if (several_sizes) A(i, 2) = std::log(use[i].size);
    b(i) = std::log(use[i].eta);
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  fit.log_prefactor = c(0);
  fit.gamma = c(1);
  fit.delta = several_sizes ? c(2) : 0.0;
  fit.residual = std::sqrt((A * c - b).squaredNorm() / double(m));
  fit.max_violation = -std::numeric_limits<double>::infinity();
  for (const GrmSample& s : samples) {
    const double env =
        std::exp(fit.log_prefactor + fit.delta * std::log(s.size) - fit.gamma * s.t);
    fit.max_violation = std::max(fit.max_violation, s.eta - env);
  }
  fit.non_mixing = fit.gamma <= 1e-9;
  return fit;
}

GrmFit fit_grm(const std::function<std::pair<double, SuperOp>(int)>& family,
               const std::vector<int>& sizes, const std::vector<double>& t_grid,
               const ContractionOptions& opt) {
  if (sizes.size() < 2) throw DomainError("fit_grm needs at least two sizes");
  std::vector<GrmSample> samples;
  for (int n : sizes) {
    auto [size, L] = family(n);
    Semigroup g(L);
    const AsymptoticProjectors P = asymptotic_projectors(L);
    for (double t : t_grid) samples.push_back({size, t, contraction(g, P, t, opt).value});
  }
  return fit_grm(samples);
}

}  // namespace lindstab
