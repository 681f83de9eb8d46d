#include "obliq/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace obliq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()) + ", expected square");
  }
}

}  // namespace

QuantumState::QuantumState(ComplexVector amplitudes, double tol) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw Error("QuantumState: empty amplitude vector");
  if (!amps_.allFinite()) throw Error("QuantumState: non-finite amplitude");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > tol) {
    throw Error("QuantumState: norm " + std::to_string(norm) + " is not 1");
  }
}

QuantumState QuantumState::basis(Index dim, Index index) {
  if (index < 0 || index >= dim) throw Error("QuantumState::basis: index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return QuantumState(std::move(v));
}

ProbabilityDistribution::ProbabilityDistribution(std::vector<double> probabilities, double tol)
    : p_(std::move(probabilities)) {
  if (p_.empty()) throw Error("ProbabilityDistribution: empty support");
  double total = 0.0;
  for (double& x : p_) {
    if (!std::isfinite(x) || x < -tol) throw Error("ProbabilityDistribution: negative weight");
    // Roundoff below zero is clamped so entropies stay real.
    x = std::max(x, 0.0);
    total += x;
  }
  if (std::abs(total - 1.0) > tol) {
    throw Error("ProbabilityDistribution: weights sum to " + std::to_string(total));
  }
}

ProbabilityDistribution ProbabilityDistribution::uniform(std::size_t size) {
  if (size == 0) throw Error("ProbabilityDistribution::uniform: empty support");
  return ProbabilityDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

ProbabilityDistribution ProbabilityDistribution::point_mass(std::size_t size, std::size_t at) {
  if (at >= size) throw Error("ProbabilityDistribution::point_mass: index out of range");
  std::vector<double> p(size, 0.0);
  p[at] = 1.0;
  return ProbabilityDistribution(std::move(p));
}

bool ProbabilityDistribution::is_uniform(double tol) const {
  const double target = 1.0 / static_cast<double>(p_.size());
  return std::all_of(p_.begin(), p_.end(), [&](double x) { return std::abs(x - target) <= tol; });
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

SeededRng SeededRng::derive(std::uint64_t child) const {
  return SeededRng(seed_, splitmix64(stream_ ^ splitmix64(child + 0x632be59bd9b4e019ULL)));
}

double SeededRng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double SeededRng::normal() { return normal_(engine_); }

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw Error("SeededRng::below: empty range");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix tensor_power(const ComplexMatrix& a, int count) {
  if (count < 1) throw Error("tensor_power: count must be at least 1");
  ComplexMatrix out = a;
  for (int c = 1; c < count; ++c) out = tensor_product(out, a);
  return out;
}

double unitarity_defect(const ComplexMatrix& m) {
  require_square(m, "unitarity_defect");
  const ComplexMatrix gram = m.adjoint() * m;
  return (gram - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  require_square(m, "is_unitary");
  if (!m.allFinite()) return false;
  return unitarity_defect(m) <= tol;
}

bool is_hadamard(const ComplexMatrix& m, double tol) {
  require_square(m, "is_hadamard");
  if (!is_unitary(m, tol)) return false;
  const double target = 1.0 / std::sqrt(static_cast<double>(m.rows()));
  return ((m.cwiseAbs().array() - target).abs() <= tol).all();
}

double linf_overlap(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error("linf_overlap: dimension mismatch " + std::to_string(a.cols()) + " vs " +
                std::to_string(b.rows()));
  }
  return (a * b).cwiseAbs().maxCoeff();
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

double shannon_entropy(const ProbabilityDistribution& p) {
  return shannon_entropy(p.probabilities());
}

double h2_unchecked(const ComplexVector& u) {
  double h = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double p = std::norm(u(i));
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double h2(const QuantumState& u) { return h2_unchecked(u.amplitudes()); }

ComplexMatrix haar_unitary(Index dim, SeededRng& rng) {
  if (dim < 1) throw Error("haar_unitary: dimension must be at least 1");
  ComplexMatrix z(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) z(i, j) = Complex(rng.normal(), rng.normal());
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  // Fix the phase freedom of QR so the result is exactly Haar distributed.
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

std::uint64_t extract_block(std::uint64_t config, int k, int m, int position) {
  if (position < 0 || position >= k) throw Error("extract_block: position out of range");
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  return (config >> (m * (k - 1 - position))) & mask;
}

std::uint64_t rotate_configuration(std::uint64_t config, int k, int m, int shift) {
  std::uint64_t out = 0;
  for (int p = 0; p < k; ++p) out = (out << m) | extract_block(config, k, m, (p + shift) % k);
  return out;
}

ComplexMatrix rotation_permutation(int k, int m, int i) {
  if (k < 1 || m < 1) throw Error("rotation_permutation: k and m must be positive");
  if (i < 0 || i >= k) throw Error("rotation_permutation: index " + std::to_string(i) +
                                   " out of range for k = " + std::to_string(k));
  if (k * m > 12) throw Error("rotation_permutation: dimension exceeds 4096");
  const Index n = Index{1} << (k * m);
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Index d = 0; d < n; ++d) {
    p(static_cast<Index>(rotate_configuration(static_cast<std::uint64_t>(d), k, m, i)), d) = 1.0;
  }
  return p;
}

}  // namespace obliq
