#pragma once

#include "lindstab/common.hpp"
#include "lindstab/lattice.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace lindstab {

// Column-stacking vectorization: vec(A X B) = (Bᵀ ⊗ A) vec(X).
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> vec(const Eigen::MatrixBase<Derived>& X) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> tmp = X;
  return Eigen::Map<const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>>(tmp.data(),
                                                                                     tmp.size());
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(
    const Eigen::MatrixBase<Derived>& v, Index d) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> tmp = v;
  return Eigen::Map<const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>(
      tmp.data(), d, d);
}

template <class A, class B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(const Eigen::MatrixBase<A>& a,
                                                                        const Eigen::MatrixBase<B>& b) {
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                        a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Dense linear map on d×d operators, stored as a d²×d² matrix acting on vec(X).
struct SuperOp {
  Mat matrix;
  std::optional<bool> hermiticity_preserving;
  std::optional<bool> trace_annihilating;
  std::optional<bool> trace_preserving;

  SuperOp() = default;
  explicit SuperOp(Mat m);

  Index dim() const;
  Mat operator()(const Mat& X) const;
};

SuperOp operator+(const SuperOp& a, const SuperOp& b);
SuperOp operator-(const SuperOp& a, const SuperOp& b);
SuperOp operator*(double s, const SuperOp& a);
// Composition a∘b.
SuperOp compose(const SuperOp& a, const SuperOp& b);

SuperOp identity_map(Index d);
SuperOp zero_map(Index d);
// X ↦ A X B.
SuperOp sandwich(const Mat& A, const Mat& B);
SuperOp transpose_map(Index d);

// ρ ↦ i[ρ,H] + Σ LρL† − ½{L†L, ρ}. Throws DomainError if H is not Hermitian.
SuperOp from_gkls(const Mat& H, const std::vector<Mat>& jumps);

// tr(A·T(B)) = tr(dual(T)(A)·B).
SuperOp dual(const SuperOp& T);
// Hilbert–Schmidt adjoint ⟨A, T(B)⟩ = ⟨T*(A), B⟩ with ⟨A,B⟩ = tr(A†B).
SuperOp hs_adjoint(const SuperOp& T);

// Σ_ij |i⟩⟨j| ⊗ T(|i⟩⟨j|).
Mat choi(const SuperOp& T);

struct LindbladReport {
  bool hermiticity_preserving = false;
  bool trace_annihilating = false;
  bool conditionally_cp = false;
  bool overall = false;
};

LindbladReport is_valid_lindbladian(const SuperOp& L, double tol = 1e-10);
bool is_hermiticity_preserving(const SuperOp& T, double tol = 1e-10);
bool is_trace_preserving(const SuperOp& T, double tol = 1e-10);
bool is_completely_positive(const SuperOp& T, double tol = 1e-9);

double trace_norm(const Mat& X);
double operator_norm(const Mat& X);
// Polar factor of X (the unitary maximizing Re tr(W†X)).
Mat polar_unitary(const Mat& X);
Mat hermitian_part(const Mat& X);
// Reflection W = sign(X) for Hermitian X (zero eigenvalues mapped to +1).
Mat hermitian_sign(const Mat& X);

struct NormEstimate {
  double value = 0.0;
  Vec x, y;  // certificate: the value is attained at x y† (or unitary for the ∞ norm)
  int restarts = 0;
};

struct EstimatorOptions {
  int restarts = 64;
  std::uint64_t seed = 0x5eedULL;
  double tol = 1e-10;
  int max_iter = 500;
};

// sup ‖(T ⊗ id_d)(x y†)‖₁ over unit x, y ∈ C^{d²}; a lower bound on the cb 1→1 norm.
NormEstimate diamond_norm_estimate(const SuperOp& T, const EstimatorOptions& opt = {});
// Σ s_k ‖A_k‖‖B_k‖ for T = Σ s_k A_k · B_k† read off the SVD of the Choi matrix; an upper
// bound on the cb 1→1 norm, exact for unitary conjugations but loose for differences.
double diamond_norm_upper_bound(const SuperOp& T);
// sup ‖T(x y†)‖₁ over unit x, y ∈ C^d.
NormEstimate induced_1to1_norm_estimate(const SuperOp& T, const EstimatorOptions& opt = {});
// sup ‖(T ⊗ id_d)(U)‖_∞ over unitaries U; equals the cb ∞→∞ norm at the stabilized level.
NormEstimate cb_infinity_norm_estimate(const SuperOp& T, const EstimatorOptions& opt = {});

// Partial trace keeping the listed tensor factors (factor 0 is the most significant).
Mat partial_trace(const Mat& X, const std::vector<Index>& dims, const std::vector<int>& keep);
// Same with site labels: X lives on `labels` (uniform local dimension).
Mat partial_trace(const Mat& X, const Region& labels, int local_dim, const Region& keep);
// A ⊗ 1 with A placed on factors `keep`, in the factor order of `dims`.
Mat embed_operator(const Mat& A, const std::vector<Index>& dims, const std::vector<int>& keep);

SuperOp schur_multiplier(const Mat& coeffs);
// coeffs(α,β) = −γ · Hamming(α, β) on n qubits.
Mat hamming_dephasing_coeffs(int n, double gamma);

Mat basis_projector(Index d, Index i);
Mat ket_bra(Index d, Index i, Index j);

// Binary layout: "LSOP", u32 version, u64 dim, then dim² (re, im) f64 pairs, row-major,
// little endian.
void write_lsop(std::ostream& os, const Mat& M);
Mat read_lsop(std::istream& is);

}  // namespace lindstab
