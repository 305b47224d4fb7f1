#include "lindstab/common.hpp"

#include <string>

namespace lindstab {

Limits& limits() {
  static Limits l;
  return l;
}

void check_superop_dim(Index hilbert_dim) {
  const Index n = hilbert_dim * hilbert_dim;
  const double bytes = double(n) * double(n) * sizeof(cplx);
  if (hilbert_dim > limits().max_hilbert_dim || bytes > double(limits().max_bytes))
    throw ResourceError("superoperator for Hilbert dimension " + std::to_string(hilbert_dim) +
                        " exceeds the dense ceiling");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec random_unit_vector(Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v / v.norm();
}

Mat random_density_matrix(Index n, Rng& rng, Index rank) {
  if (rank <= 0) rank = n;
  std::normal_distribution<double> g;
  Mat G(n, rank);
  for (Index j = 0; j < rank; ++j)
    for (Index i = 0; i < n; ++i) G(i, j) = cplx(g(rng), g(rng));
  Mat rho = G * G.adjoint();
  return rho / rho.trace().real();
}

Mat random_unitary(Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Mat G(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) G(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const cplx d = R(j, j);
    if (std::abs(d) > 0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

}  // namespace lindstab
