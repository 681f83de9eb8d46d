#include <doctest.h>

#include <cmath>
#include <numbers>

#include "obliq/qmath.hpp"

using namespace obliq;

namespace {

ComplexMatrix w2() {
  const double s = 1.0 / std::numbers::sqrt2;
  ComplexMatrix w(2, 2);
  w << s, s, -s, s;
  return w;
}

// Entrywise Kronecker oracle written from the index formula.
ComplexMatrix kron_oracle(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) out(r, c) = a(r / b.rows(), c / b.cols()) * b(r % b.rows(), c % b.cols());
  }
  return out;
}

ComplexMatrix random_matrix(Index rows, Index cols, SeededRng& rng) {
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
  }
  return m;
}

}  // namespace

TEST_CASE("tensor product uses first-factor-most-significant order") {
  CHECK(tensor_product(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)).isApprox(ComplexMatrix::Identity(4, 4)));

  const ComplexMatrix ww = tensor_product(w2(), w2());
  REQUIRE(ww.rows() == 4);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) CHECK(std::abs(ww(i, j)) == doctest::Approx(0.5).epsilon(1e-15));
  }

  ComplexVector e0 = ComplexVector::Unit(2, 0), e1 = ComplexVector::Unit(2, 1);
  const ComplexMatrix e = tensor_product(ComplexMatrix(e1), ComplexMatrix(e0));
  CHECK(e.isApprox(ComplexMatrix(ComplexVector::Unit(4, 2))));

  SeededRng rng(5);
  const ComplexMatrix a = random_matrix(2, 3, rng), b = random_matrix(3, 2, rng), c = random_matrix(2, 2, rng);
  CHECK((tensor_product(a, b) - kron_oracle(a, b)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((tensor_product(tensor_product(a, b), c) - tensor_product(a, tensor_product(b, c))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(tensor_power(w2(), 3).isApprox(tensor_product(w2(), ww)));
}

TEST_CASE("unitarity and Hadamard certification") {
  CHECK(is_unitary(ComplexMatrix::Identity(4, 4)));
  CHECK(is_unitary(w2()));
  CHECK_FALSE(is_unitary(ComplexMatrix::Ones(3, 3)));
  CHECK_THROWS_AS(is_unitary(ComplexMatrix::Ones(2, 3)), Error);

  CHECK(is_hadamard(w2()));
  CHECK_FALSE(is_hadamard(ComplexMatrix::Identity(2, 2)));
  CHECK_THROWS_AS(is_hadamard(ComplexMatrix::Ones(2, 3)), Error);
}

TEST_CASE("linf overlap") {
  const ComplexMatrix id4 = ComplexMatrix::Identity(4, 4);
  CHECK(linf_overlap(id4, id4) == 1.0);
  CHECK(linf_overlap(ComplexMatrix::Identity(2, 2), w2()) == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK_THROWS_AS(linf_overlap(id4, ComplexMatrix::Identity(2, 2)), Error);
}

TEST_CASE("shannon entropy and h2") {
  const std::vector<double> quarter{0.25, 0.25, 0.25, 0.25};
  CHECK(shannon_entropy(ProbabilityDistribution(quarter)) == doctest::Approx(2.0));
  CHECK(shannon_entropy(ProbabilityDistribution::point_mass(4, 0)) == 0.0);
  CHECK(shannon_entropy(ProbabilityDistribution({0.5, 0.5, 0.0, 0.0})) == doctest::Approx(1.0));

  CHECK(h2(QuantumState::basis(4, 3)) == 0.0);
  const ComplexMatrix w4 = tensor_product(w2(), w2());
  for (Index c = 0; c < 4; ++c) CHECK(h2(QuantumState(w4.col(c))) == doctest::Approx(2.0));

  ComplexVector u(4);
  u << std::sqrt(0.5), std::sqrt(0.25), std::sqrt(0.25), 0.0;
  // -(0.5 log 0.5 + 2 * 0.25 log 0.25) = 0.5 + 1
  CHECK(h2(QuantumState(u)) == doctest::Approx(1.5).epsilon(1e-14));

  ComplexVector bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(QuantumState{bad}, Error);
}

TEST_CASE("entropy is at most log of the support, with equality only when uniform") {
  SeededRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t size = 2 + rng.below(15);
    std::vector<double> p(size);
    double total = 0.0;
    for (double& x : p) total += (x = rng.uniform());
    for (double& x : p) x /= total;
    CHECK(shannon_entropy(ProbabilityDistribution(p)) <= std::log2(static_cast<double>(size)) + 1e-12);
  }
  for (std::size_t size : {2u, 3u, 7u, 16u}) {
    CHECK(shannon_entropy(ProbabilityDistribution::uniform(size)) ==
          doctest::Approx(std::log2(static_cast<double>(size))).epsilon(1e-12));
  }
}

TEST_CASE("h2 is invariant under permutations") {
  SeededRng rng(2);
  ComplexVector u(8);
  for (Index i = 0; i < 8; ++i) u(i) = Complex(rng.normal(), rng.normal());
  u /= u.norm();
  const ComplexMatrix p = rotation_permutation(3, 1, 1);
  CHECK(h2(QuantumState(p * u)) == doctest::Approx(h2(QuantumState(u))).epsilon(1e-14));
}

TEST_CASE("probability distributions are validated") {
  CHECK_THROWS_AS(ProbabilityDistribution({0.5, 0.6}), Error);
  CHECK_THROWS_AS(ProbabilityDistribution({1.5, -0.5}), Error);
  CHECK(ProbabilityDistribution::uniform(4).is_uniform());
  CHECK_FALSE(ProbabilityDistribution::point_mass(4, 1).is_uniform());
}

TEST_CASE("seeded rng streams are reproducible and distinct") {
  SeededRng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t x = a.below(1u << 30);
    CHECK(x == b.below(1u << 30));
    differs = differs || x != c.below(1u << 30);
  }
  CHECK(differs);
  SeededRng d1 = SeededRng(42).derive(3), d2 = SeededRng(42).derive(3);
  CHECK(d1.stream() == d2.stream());
  CHECK(d1.normal() == d2.normal());
  CHECK(SeededRng(42).derive(3).stream() != SeededRng(42).derive(4).stream());
}

TEST_CASE("haar unitaries") {
  SeededRng rng(17);
  const ComplexMatrix one = haar_unitary(1, rng);
  CHECK(std::abs(std::abs(one(0, 0)) - 1.0) < 1e-12);
  CHECK_THROWS_AS(haar_unitary(0, rng), Error);

  for (Index dim : {2, 3, 8, 17, 64, 256}) CHECK(is_unitary(haar_unitary(dim, rng)));

  SeededRng r1(99), r2(99);
  CHECK((haar_unitary(8, r1) - haar_unitary(8, r2)).cwiseAbs().maxCoeff() == 0.0);

  // |U_00|^2 is uniform on [0, 1] at dim 2: mean 1/2, variance 1/12.
  SeededRng mc(123);
  const int samples = 1000;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) sum += std::norm(haar_unitary(2, mc)(0, 0));
  const double sigma = std::sqrt(1.0 / 12.0 / samples);
  CHECK(std::abs(sum / samples - 0.5) <= 3.0 * sigma);
}

TEST_CASE("haar measure is left invariant in its second moment") {
  // E|U_00|^4 = 2/(d(d+1)) for Haar U; V·U must match for a fixed unitary V.
  SeededRng rng(8);
  const Index d = 3;
  const ComplexMatrix v = haar_unitary(d, rng);
  const int samples = 4000;
  double plain = 0.0, rotated = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ComplexMatrix u = haar_unitary(d, rng);
    plain += std::pow(std::norm(u(0, 0)), 2);
    rotated += std::pow(std::norm((v * u)(0, 0)), 2);
  }
  const double expected = 2.0 / (d * (d + 1));
  // Var |U_00|^4 ≤ E|U_00|^8 = 24/(d(d+1)(d+2)(d+3)) = 1/15.
  const double sigma = std::sqrt(1.0 / 15.0 / samples);
  CHECK(std::abs(plain / samples - expected) <= 3.0 * sigma);
  CHECK(std::abs(rotated / samples - expected) <= 3.0 * sigma);
}

TEST_CASE("configuration blocks and rotations") {
  CHECK(extract_block(0b110, 3, 1, 0) == 1);
  CHECK(extract_block(0b110, 3, 1, 2) == 0);
  CHECK(extract_block(0x2C, 3, 2, 0) == 0b10);
  CHECK(extract_block(0x2C, 3, 2, 1) == 0b11);
  CHECK(extract_block(0x2C, 3, 2, 2) == 0b00);

  const ComplexMatrix p1 = rotation_permutation(2, 1, 1);
  CHECK(p1(1, 2) == Complex(1.0));  // d=10 → 01
  CHECK(rotation_permutation(2, 1, 0).isApprox(ComplexMatrix::Identity(4, 4)));

  // d_0 d_1 d_2 = 1 1 0 rotated by one is d_1 d_2 d_0 = 1 0 1.
  CHECK(rotate_configuration(0b110, 3, 1, 1) == 0b101);
  CHECK(rotation_permutation(3, 1, 1)(0b101, 0b110) == Complex(1.0));

  CHECK_THROWS_AS(rotation_permutation(3, 1, 3), Error);
  CHECK_THROWS_AS(rotation_permutation(3, 1, -1), Error);

  for (int k : {2, 3, 4}) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const ComplexMatrix lhs = rotation_permutation(k, 1, i) * rotation_permutation(k, 1, j);
        CHECK(lhs.isApprox(rotation_permutation(k, 1, (i + j) % k)));
      }
    }
  }
}
