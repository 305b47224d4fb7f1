#include "lindstab/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace lindstab {

namespace {

Index isqrt_exact(Index n) {
  Index d = Index(std::llround(std::sqrt(double(n))));
  if (d * d != n) throw DomainError("superoperator size is not a square");
  return d;
}

double max_abs(const Mat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

// Index of vec(Xᵀ) entry corresponding to vec(X) entry p.
inline Index swap_index(Index p, Index d) { return (p % d) * d + p / d; }

}  // namespace

SuperOp::SuperOp(Mat m) : matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols()) throw DomainError("superoperator matrix must be square");
  isqrt_exact(matrix.rows());
}

Index SuperOp::dim() const { return isqrt_exact(matrix.rows()); }

Mat SuperOp::operator()(const Mat& X) const {
  const Index d = dim();
  if (X.rows() != d || X.cols() != d) throw DomainError("operator dimension mismatch");
  Vec v = matrix * vec(X);
  return unvec(v, d);
}

SuperOp operator+(const SuperOp& a, const SuperOp& b) { return SuperOp(a.matrix + b.matrix); }
SuperOp operator-(const SuperOp& a, const SuperOp& b) { return SuperOp(a.matrix - b.matrix); }
SuperOp operator*(double s, const SuperOp& a) { return SuperOp(s * a.matrix); }
SuperOp compose(const SuperOp& a, const SuperOp& b) { return SuperOp(a.matrix * b.matrix); }

SuperOp identity_map(Index d) {
  SuperOp T(Mat::Identity(d * d, d * d));
  T.hermiticity_preserving = true;
  T.trace_preserving = true;
  return T;
}

SuperOp zero_map(Index d) { return SuperOp(Mat::Zero(d * d, d * d)); }

SuperOp sandwich(const Mat& A, const Mat& B) { return SuperOp(kron(B.transpose(), A)); }

SuperOp transpose_map(Index d) {
  Mat M = Mat::Zero(d * d, d * d);
  for (Index p = 0; p < d * d; ++p) M(swap_index(p, d), p) = 1.0;
  return SuperOp(std::move(M));
}

SuperOp from_gkls(const Mat& H, const std::vector<Mat>& jumps) {
  const Index d = H.rows();
  if (H.cols() != d) throw DomainError("Hamiltonian must be square");
  const double scale = std::max(1.0, max_abs(H));
  if (max_abs(H - H.adjoint()) > 1e-10 * scale) throw DomainError("Hamiltonian is not Hermitian");
  const Mat Id = Mat::Identity(d, d);
  Mat M = I_unit * kron(H.transpose(), Id) - I_unit * kron(Id, H);
  for (const Mat& L : jumps) {
    if (L.rows() != d || L.cols() != d) throw DomainError("Lindblad operator dimension mismatch");
    const Mat LdL = L.adjoint() * L;
    M += kron(L.conjugate(), L) - 0.5 * kron(Id, LdL) - 0.5 * kron(LdL.transpose(), Id);
  }
  SuperOp out(std::move(M));
  out.hermiticity_preserving = true;
  out.trace_annihilating = true;
  return out;
}

SuperOp dual(const SuperOp& T) {
  const Index d = T.dim(), n = d * d;
  Mat M(n, n);
  for (Index q = 0; q < n; ++q)
    for (Index p = 0; p < n; ++p) M(p, q) = T.matrix(swap_index(q, d), swap_index(p, d));
  return SuperOp(std::move(M));
}

SuperOp hs_adjoint(const SuperOp& T) { return SuperOp(T.matrix.adjoint()); }

Mat choi(const SuperOp& T) {
  const Index d = T.dim();
  Mat C(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b) C(i * d + a, j * d + b) = T.matrix(b * d + a, j * d + i);
  return C;
}

double diamond_norm_upper_bound(const SuperOp& T) {
  const Index d = T.dim();
  Eigen::JacobiSVD<Mat> svd(choi(T), Eigen::ComputeFullU | Eigen::ComputeFullV);
  double s = 0.0;
  for (Index k = 0; k < svd.singularValues().size(); ++k) {
    const double sk = svd.singularValues()(k);
    if (sk == 0.0) continue;
    s += sk * operator_norm(unvec(Vec(svd.matrixU().col(k)), d)) * operator_norm(unvec(Vec(svd.matrixV().col(k)), d));
  }
  return s;
}

bool is_hermiticity_preserving(const SuperOp& T, const double tol) {
  const Index d = T.dim(), n = d * d;
  const double scale = std::max(1.0, max_abs(T.matrix));
  for (Index q = 0; q < n; ++q)
    for (Index p = 0; p < n; ++p)
      if (std::abs(T.matrix(p, q) - std::conj(T.matrix(swap_index(p, d), swap_index(q, d)))) >
          tol * scale)
        return false;
  return true;
}

namespace {

// Row vector vec(1)ᵀ M, i.e. the trace functional composed with T.
Eigen::RowVectorXcd trace_row(const SuperOp& T) {
  const Index d = T.dim();
  Eigen::RowVectorXcd r = Eigen::RowVectorXcd::Zero(d * d);
  for (Index i = 0; i < d; ++i) r += T.matrix.row(i * d + i);
  return r;
}

}  // namespace

bool is_trace_preserving(const SuperOp& T, const double tol) {
  const Index d = T.dim();
  Eigen::RowVectorXcd r = trace_row(T);
  for (Index i = 0; i < d; ++i) r(i * d + i) -= 1.0;
  return r.cwiseAbs().maxCoeff() <= tol * std::max(1.0, max_abs(T.matrix));
}

bool is_completely_positive(const SuperOp& T, const double tol) {
  Mat C = choi(T);
  C = hermitian_part(C);
  Eigen::SelfAdjointEigenSolver<Mat> es(C, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

LindbladReport is_valid_lindbladian(const SuperOp& L, const double tol) {
  LindbladReport rep;
  const Index d = L.dim();
  const double scale = std::max(1.0, max_abs(L.matrix));
  rep.hermiticity_preserving = is_hermiticity_preserving(L, tol);
  rep.trace_annihilating = trace_row(L).cwiseAbs().maxCoeff() <= tol * scale;
  // Choi matrix compressed to the complement of the maximally entangled vector.
  Mat C = hermitian_part(choi(L));
  Vec omega = Vec::Zero(d * d);
  for (Index i = 0; i < d; ++i) omega(i * d + i) = 1.0 / std::sqrt(double(d));
  Mat P = Mat::Identity(d * d, d * d) - omega * omega.adjoint();
  Mat PCP = hermitian_part(P * C * P);
  Eigen::SelfAdjointEigenSolver<Mat> es(PCP, Eigen::EigenvaluesOnly);
  const double cscale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  rep.conditionally_cp = es.eigenvalues().minCoeff() >= -1e-9 * cscale;
  rep.overall = rep.hermiticity_preserving && rep.trace_annihilating && rep.conditionally_cp;
  return rep;
}

Mat hermitian_part(const Mat& X) { return 0.5 * (X + X.adjoint()); }

double trace_norm(const Mat& X) {
  if (X.size() == 0) return 0.0;
  const double scale = std::max(1e-300, max_abs(X));
  if (max_abs(X - X.adjoint()) <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(X), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Mat> svd(X);
  return svd.singularValues().sum();
}

double operator_norm(const Mat& X) {
  if (X.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(X);
  return svd.singularValues()(0);
}

Mat polar_unitary(const Mat& X) {
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Mat hermitian_sign(const Mat& X) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(X));
  RVec s = es.eigenvalues().unaryExpr([](double l) { return l < 0 ? -1.0 : 1.0; });
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// T ⊗ id_n acting on (n d)×(n d) operators, with the ancilla as the leading factor:
// block (a,b) of X is mapped by T.
Mat apply_blockwise(const Mat& M, const Mat& X, Index d, Index n) {
  Mat S(d * d, n * n);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a) S.col(b * n + a) = vec(X.block(a * d, b * d, d, d));
  Mat R = M * S;
  Mat Z(n * d, n * d);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a) Z.block(a * d, b * d, d, d) = unvec(R.col(b * n + a), d);
  return Z;
}

struct TraceNormAscent {
  const Mat& M;   // T
  Mat Madj;       // T*
  Index d, n;

  TraceNormAscent(const Mat& m, Index d_, Index n_) : M(m), Madj(m.adjoint()), d(d_), n(n_) {}

  double value(const Vec& x, const Vec& y) const {
    return trace_norm(apply_blockwise(M, x * y.adjoint(), d, n));
  }

  // Alternating maximization of Re tr(W† Φ(x y†)); returns the final trace norm.
  double run(Vec& x, Vec& y, double tol, int max_iter) const {
    double best = -1.0;
    for (int it = 0; it < max_iter; ++it) {
      Mat Z = apply_blockwise(M, x * y.adjoint(), d, n);
      Eigen::JacobiSVD<Mat> svdz(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double val = svdz.singularValues().sum();
      if (val <= best + tol * std::max(1.0, val)) {
        best = std::max(best, val);
        break;
      }
      best = val;
      Mat W = svdz.matrixU() * svdz.matrixV().adjoint();
      Mat G = apply_blockwise(Madj, W, d, n).adjoint();
      Eigen::JacobiSVD<Mat> svdg(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
      y = svdg.matrixU().col(0);
      x = svdg.matrixV().col(0);
    }
    return best;
  }
};

std::vector<Vec> grid_vectors(Index d, Index n) {
  std::vector<Vec> out;
  const Index N = n * d;
  for (Index i = 0; i < N; ++i) out.push_back(Vec::Unit(N, i));
  if (n == d) {
    // maximally entangled vectors (1 ⊗ X^a Z^b)|Ω⟩
    const double pi = std::acos(-1.0);
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b) {
        Vec v = Vec::Zero(N);
        for (Index i = 0; i < d; ++i) {
          Index j = (i + a) % d;
          v(i * d + j) = std::polar(1.0, 2 * pi * double(b * i) / double(d)) / std::sqrt(double(d));
        }
        out.push_back(v);
      }
  } else {
    for (Index i = 0; i < N; ++i)
      for (Index j = i + 1; j < N; ++j) {
        Vec v = (Vec::Unit(N, i) + Vec::Unit(N, j)) / std::sqrt(2.0);
        out.push_back(v);
        v(j) *= I_unit;
        out.push_back(v);
      }
  }
  return out;
}

NormEstimate trace_norm_estimate(const SuperOp& T, Index n, const EstimatorOptions& opt,
                                 const NormEstimate* seed_point) {
  const Index d = T.dim();
  TraceNormAscent asc(T.matrix, d, n);
  NormEstimate best;
  best.value = -1.0;
  auto consider = [&](Vec x, Vec y) {
    double v = asc.run(x, y, opt.tol, opt.max_iter);
    if (v > best.value) {
      best.value = v;
      best.x = x;
      best.y = y;
    }
    ++best.restarts;
  };
  if (seed_point) {
    // lift an ancilla-free certificate to the first ancilla block
    Vec x = Vec::Zero(n * d), y = Vec::Zero(n * d);
    x.head(d) = seed_point->x;
    y.head(d) = seed_point->y;
    consider(x, y);
  }
  for (int k = 0; k < opt.restarts; ++k) {
    Rng rng(derive_seed(opt.seed, std::uint64_t(k)));
    Vec x = random_unit_vector(n * d, rng);
    Vec y = random_unit_vector(n * d, rng);
    consider(x, y);
  }
  if (d <= 4) {
    std::vector<Vec> grid = grid_vectors(d, n);
    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> scored;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j)
        scored.push_back({asc.value(grid[i], grid[j]), {i, j}});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; k < std::min<std::size_t>(8, scored.size()); ++k)
      consider(grid[scored[k].second.first], grid[scored[k].second.second]);
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

}  // namespace

NormEstimate induced_1to1_norm_estimate(const SuperOp& T, const EstimatorOptions& opt) {
  return trace_norm_estimate(T, 1, opt, nullptr);
}

NormEstimate diamond_norm_estimate(const SuperOp& T, const EstimatorOptions& opt) {
  NormEstimate seed = induced_1to1_norm_estimate(T, opt);
  NormEstimate out = trace_norm_estimate(T, T.dim(), opt, &seed);
  out.restarts += seed.restarts;
  return out;
}

NormEstimate cb_infinity_norm_estimate(const SuperOp& T, const EstimatorOptions& opt) {
  const Index d = T.dim(), n = d, N = n * d;
  const Mat& M = T.matrix;
  const Mat Madj = M.adjoint();
  NormEstimate best;
  best.value = -1.0;
  auto run = [&](Mat U) {
    double val = -1.0;
    for (int it = 0; it < opt.max_iter; ++it) {
      Mat Z = apply_blockwise(M, U, d, n);
      Eigen::JacobiSVD<Mat> svd(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double v = svd.singularValues()(0);
      const bool stalled = v <= val + opt.tol * std::max(1.0, v);
      val = std::max(val, v);
      if (stalled) break;
      Vec u = svd.matrixU().col(0), w = svd.matrixV().col(0);
      Mat G = apply_blockwise(Madj, u * w.adjoint(), d, n);
      U = polar_unitary(G);
    }
    if (val > best.value) best.value = val;
    ++best.restarts;
  };
  run(Mat::Identity(N, N));
  for (int k = 0; k < opt.restarts; ++k) {
    Rng rng(derive_seed(opt.seed, std::uint64_t(k)));
    run(random_unitary(N, rng));
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

namespace {

struct FactorSplit {
  std::vector<Index> keep_idx, rest_idx;
  Index keep_dim = 1, rest_dim = 1;
};

FactorSplit split_factors(const std::vector<Index>& dims, const std::vector<int>& keep) {
  const int n = int(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw DomainError("kept factor out of range");
    kept[k] = true;
  }
  FactorSplit s;
  Index N = 1;
  for (int k = 0; k < n; ++k) {
    N *= dims[k];
    (kept[k] ? s.keep_dim : s.rest_dim) *= dims[k];
  }
  s.keep_idx.resize(N);
  s.rest_idx.resize(N);
  std::vector<Index> digit(n, 0);
  for (Index i = 0; i < N; ++i) {
    Index ki = 0, ri = 0;
    for (int k = 0; k < n; ++k) {
      if (kept[k])
        ki = ki * dims[k] + digit[k];
      else
        ri = ri * dims[k] + digit[k];
    }
    s.keep_idx[i] = ki;
    s.rest_idx[i] = ri;
    for (int k = n - 1; k >= 0; --k) {
      if (++digit[k] < dims[k]) break;
      digit[k] = 0;
    }
  }
  return s;
}

}  // namespace

Mat partial_trace(const Mat& X, const std::vector<Index>& dims, const std::vector<int>& keep) {
  FactorSplit s = split_factors(dims, keep);
  const Index N = Index(s.keep_idx.size());
  if (X.rows() != N || X.cols() != N) throw DomainError("operator does not match factor dims");
  std::vector<std::vector<Index>> by_rest(s.rest_dim);
  for (Index i = 0; i < N; ++i) by_rest[s.rest_idx[i]].push_back(i);
  Mat out = Mat::Zero(s.keep_dim, s.keep_dim);
  for (const auto& group : by_rest)
    for (Index j : group)
      for (Index i : group) out(s.keep_idx[i], s.keep_idx[j]) += X(i, j);
  return out;
}

Mat partial_trace(const Mat& X, const Region& labels, int local_dim, const Region& keep) {
  if (!keep.subset_of(labels)) throw DomainError("kept region is not a subset of the labels");
  std::vector<Index> dims(labels.size(), local_dim);
  std::vector<int> k;
  for (const Site& x : keep) k.push_back(int(labels.index_of(x)));
  return partial_trace(X, dims, k);
}

Mat embed_operator(const Mat& A, const std::vector<Index>& dims, const std::vector<int>& keep) {
  FactorSplit s = split_factors(dims, keep);
  const Index N = Index(s.keep_idx.size());
  if (A.rows() != s.keep_dim) throw DomainError("operator does not match kept factors");
  Mat out = Mat::Zero(N, N);
  for (Index j = 0; j < N; ++j)
    for (Index i = 0; i < N; ++i)
      if (s.rest_idx[i] == s.rest_idx[j]) out(i, j) = A(s.keep_idx[i], s.keep_idx[j]);
  return out;
}

SuperOp schur_multiplier(const Mat& coeffs) {
  if (coeffs.rows() != coeffs.cols()) throw DomainError("Schur coefficients must be square");
  Vec c = vec(coeffs);
  return SuperOp(Mat(c.asDiagonal()));
}

Mat hamming_dephasing_coeffs(int n, double gamma) {
  const Index d = Index(1) << n;
  Mat C(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) C(a, b) = -gamma * double(std::popcount(std::uint64_t(a ^ b)));
  return C;
}

Mat basis_projector(Index d, Index i) { return ket_bra(d, i, i); }

Mat ket_bra(Index d, Index i, Index j) {
  Mat P = Mat::Zero(d, d);
  P(i, j) = 1.0;
  return P;
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>)
    std::memcpy(&bits, &v, 8);
  else
    bits = std::uint64_t(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = (unsigned char)((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw DomainError("truncated LSOP stream");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t(buf[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>) {
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  } else {
    return T(bits);
  }
}

}  // namespace

void write_lsop(std::ostream& os, const Mat& M) {
  if (M.rows() != M.cols()) throw DomainError("LSOP stores square matrices");
  os.write("LSOP", 4);
  put_le<std::uint32_t>(os, 1);
  put_le<std::uint64_t>(os, std::uint64_t(M.rows()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) {
      put_le<double>(os, M(i, j).real());
      put_le<double>(os, M(i, j).imag());
    }
}

Mat read_lsop(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "LSOP", 4) != 0) throw DomainError("bad LSOP magic");
  const auto version = get_le<std::uint32_t>(is);
  if (version != 1) throw DomainError("unsupported LSOP version");
  const auto n = Index(get_le<std::uint64_t>(is));
  Mat M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      double re = get_le<double>(is);
      double im = get_le<double>(is);
      M(i, j) = cplx(re, im);
    }
  return M;
}

}  // namespace lindstab
