#pragma once

// Dense complex linear algebra, entropy functionals, configuration-index
// permutations and seeded randomness shared by every other module.
//
// Index convention: in a configuration of k items of m bits each, item 0
// occupies the most significant m bits. Tensor products follow the same
// order, so (A ⊗ B)(i·rows(B) + i', j·cols(B) + j') = A(i, j)·B(i', j').
//
// All logarithms are base 2; 0·log 0 is taken as 0.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace obliq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Raised whenever a precondition or a certification fails.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kUnitaryTol = 1e-9;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kProbabilityTol = 1e-9;

// Largest supported configuration-space dimension.
inline constexpr Index kMaxDimension = 4096;

/// Unit complex vector.
class QuantumState {
 public:
  explicit QuantumState(ComplexVector amplitudes, double tol = kNormTol);

  static QuantumState basis(Index dim, Index index);

  Index dim() const { return amps_.size(); }
  const ComplexVector& amplitudes() const { return amps_; }
  Complex operator[](Index i) const { return amps_(i); }

 private:
  ComplexVector amps_;
};

/// Nonnegative weights summing to one.
class ProbabilityDistribution {
 public:
  explicit ProbabilityDistribution(std::vector<double> probabilities,
                                   double tol = kProbabilityTol);

  static ProbabilityDistribution uniform(std::size_t size);
  static ProbabilityDistribution point_mass(std::size_t size, std::size_t at);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probabilities() const { return p_; }
  bool is_uniform(double tol = 1e-12) const;

 private:
  std::vector<double> p_;
};

/// Deterministic random source identified by (root seed, stream id).
///
/// Parallel work derives one child stream per task with derive(), so results
/// never depend on scheduling order.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  SeededRng derive(std::uint64_t child) const;

  double uniform();                     // [0, 1)
  double normal();                      // N(0, 1)
  std::uint64_t below(std::uint64_t n); // uniform on [0, n)

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor_power(const ComplexMatrix& a, int count);

/// max |(M†M − I)_ij|
double unitarity_defect(const ComplexMatrix& m);
bool is_unitary(const ComplexMatrix& m, double tol = kUnitaryTol);
/// Unitary with every entry of magnitude 1/√n (complex Hadamard).
bool is_hadamard(const ComplexMatrix& m, double tol = kUnitaryTol);

/// L∞ of the product a·b, taken exactly as written.
double linf_overlap(const ComplexMatrix& a, const ComplexMatrix& b);

double shannon_entropy(std::span<const double> p);
double shannon_entropy(const ProbabilityDistribution& p);
/// Entropy of the squared-magnitude distribution of a unit vector.
double h2(const QuantumState& u);
/// Same, for an arbitrary vector known to be normalized by construction.
double h2_unchecked(const ComplexVector& u);

ComplexMatrix haar_unitary(Index dim, SeededRng& rng);

// Configuration-index arithmetic (item 0 most significant).
std::uint64_t extract_block(std::uint64_t config, int k, int m, int position);
std::uint64_t rotate_configuration(std::uint64_t config, int k, int m, int shift);

/// 0/1 matrix sending the index of d_0…d_{k−1} to that of
/// d_i…d_{k−1}d_0…d_{i−1}.
ComplexMatrix rotation_permutation(int k, int m, int i);

}  // namespace obliq
