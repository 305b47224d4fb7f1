#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lindstab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx I_unit{0.0, 1.0};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Allocation would exceed the configured dimension or memory ceiling.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UniquenessError : std::runtime_error {
  UniquenessError(const std::string& what, Index dim)
      : std::runtime_error(what), dimension(dim) {}
  Index dimension;
};

struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateSpectrumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Limits {
  // Largest Hilbert-space dimension whose superoperator may be formed densely
  // (16384² complex entries for 7 qubits).
  Index max_hilbert_dim = 128;
  // Memory budget for a single dense superoperator, in bytes.
  std::size_t max_bytes = std::size_t(3) << 30;
};

Limits& limits();

// Throws ResourceError if a dense d²×d² superoperator cannot be formed.
void check_superop_dim(Index hilbert_dim);

std::uint64_t splitmix64(std::uint64_t x);

// Per-task seed from a root seed and a counter; independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) {
  return splitmix64(root ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

Vec random_unit_vector(Index n, Rng& rng);
Mat random_density_matrix(Index n, Rng& rng, Index rank = 0);
Mat random_unitary(Index n, Rng& rng);

}  // namespace lindstab
