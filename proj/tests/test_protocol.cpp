#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>

#include "obliq/protocol.hpp"

using namespace obliq;

namespace {

// Per-item leakage straight from the definition: average over announced
// encodings and outcomes of m − H(marginal posterior of item t).
std::vector<double> dense_leakage(const EncodingFamily& f, int j) {
  const MeasurementBasis basis = honest_basis(f, j);
  const Index n = f.dim();
  const int k = f.k(), m = f.m();
  const std::size_t l = std::size_t{1} << m;
  std::vector<double> remaining(static_cast<std::size_t>(k), 0.0);
  const ProbabilityDistribution prior = ProbabilityDistribution::uniform(static_cast<std::size_t>(n));
  for (int i = 0; i < k; ++i) {
    for (Index o = 0; o < n; ++o) {
      // P(o | i) = 1/n for a unitary M under the uniform prior.
      const ProbabilityDistribution post = posterior(basis, f, i, o, prior);
      for (int t = 0; t < k; ++t) {
        std::vector<double> marginal(l, 0.0);
        for (std::size_t d = 0; d < post.size(); ++d) marginal[extract_block(d, k, m, t)] += post[d];
        remaining[static_cast<std::size_t>(t)] += shannon_entropy(marginal) / static_cast<double>(n * k);
      }
    }
  }
  std::vector<double> leak(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) leak[static_cast<std::size_t>(t)] = t == j ? 0.0 : m - remaining[static_cast<std::size_t>(t)];
  return leak;
}

}  // namespace

TEST_CASE("databases") {
  const DatabaseState db(3, 2, {0b10, 0b11, 0b00});
  CHECK(db.configuration() == 0x2C);
  CHECK(DatabaseState::from_hex(3, 2, "2C").items() == db.items());
  CHECK(DatabaseState::from_hex(3, 2, "002c").configuration() == 0x2C);
  CHECK_THROWS_AS(DatabaseState::from_hex(3, 2, "2C9"), Error);
  CHECK_THROWS_AS(DatabaseState::from_hex(3, 2, "xyz"), Error);
  CHECK_THROWS_AS(DatabaseState::from_hex(2, 1, "5"), Error);
  CHECK_THROWS_AS(DatabaseState(2, 1, {2, 0}), Error);
  CHECK_THROWS_AS(DatabaseState(2, 1, {1}), Error);
  CHECK(DatabaseState::from_configuration(2, 1, 2).item(0) == 1);
}

TEST_CASE("vendor encoding and outcome distributions") {
  const EncodingFamily f = explicit_single_bit_family();
  const double s = 1.0 / std::numbers::sqrt2;
  const QuantumState u = vendor_encode(DatabaseState(2, 1, {0, 1}), f, 0);  // |0>|->
  ComplexVector expect(4);
  expect << s, -s, 0, 0;
  CHECK((u.amplitudes() - expect).norm() < 1e-15);

  // Computational basis: outcomes 00 and 01 with probability 1/2 each.
  const MeasurementBasis comp(ComplexMatrix::Identity(4, 4));
  const ProbabilityDistribution p = outcome_distribution(u, comp);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == 0.0);

  // The honest basis for item 0 reads d0 = 0 with certainty under E_0.
  const ProbabilityDistribution h = outcome_distribution(u, honest_basis(f, 0));
  double mass_d0_zero = 0.0;
  for (std::uint64_t o = 0; o < 4; ++o) {
    if (decode_item(o, 0, 0, 2, 1) == 0) mass_d0_zero += h[o];
  }
  CHECK(mass_d0_zero == doctest::Approx(1.0));
  CHECK_THROWS_AS(MeasurementBasis(ComplexMatrix::Ones(4, 4)), Error);
}

TEST_CASE("posterior under the computational basis") {
  const EncodingFamily f = explicit_single_bit_family();
  const MeasurementBasis comp(ComplexMatrix::Identity(4, 4));
  const auto prior = ProbabilityDistribution::uniform(4);
  // Under E_0 outcome 00 fixes d0 = 0 and leaves d1 uniform.
  const ProbabilityDistribution p0 = posterior(comp, f, 0, 0, prior);
  CHECK(p0[0] == doctest::Approx(0.5));
  CHECK(p0[1] == doctest::Approx(0.5));
  CHECK(p0[2] == 0.0);
  // Under E_1 only configurations 00 and 01 put weight on |00>.
  const ProbabilityDistribution p1 = posterior(comp, f, 1, 0, prior);
  CHECK(p1[0] == doctest::Approx(0.5));
  CHECK(p1[1] == doctest::Approx(0.5));
  // Nonuniform prior goes through Bayes.
  const ProbabilityDistribution skew = posterior(comp, f, 0, 0, ProbabilityDistribution({0.75, 0.25, 0.0, 0.0}));
  CHECK(skew[0] == doctest::Approx(0.75));
  CHECK_THROWS_AS(posterior(comp, f, 0, 0, ProbabilityDistribution({0.0, 0.0, 0.5, 0.5})), Error);
}

TEST_CASE("information accounting") {
  const EncodingFamily f = explicit_single_bit_family();
  const auto prior = ProbabilityDistribution::uniform(4);

  // Computational basis: every posterior has two equally likely configurations.
  const InfoAccount comp = info_account(MeasurementBasis(ComplexMatrix::Identity(4, 4)), f, prior);
  for (double g : comp.gain) CHECK(g == doctest::Approx(1.0));
  CHECK(comp.gain_expected == doctest::Approx(1.0));

  // Inverting E_0: certain under E_0 (h = 0), uniform under E_1 (h = 2).
  const InfoAccount inv = info_account(MeasurementBasis(f.encoder(0).adjoint()), f, prior);
  for (Index j = 0; j < 4; ++j) {
    CHECK(inv.h_cond[j][0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inv.h_cond[j][1] == doctest::Approx(2.0));
    CHECK(inv.h_avg[j] == doctest::Approx(1.0));
  }
  CHECK(inv.gain_worst == doctest::Approx(1.0));

  // A Bell basis stays within the bound.
  const double s = 1.0 / std::numbers::sqrt2;
  ComplexMatrix bell(4, 4);
  bell << s, 0, 0, s, s, 0, 0, -s, 0, s, s, 0, 0, s, -s, 0;
  const InfoAccount b = info_account(MeasurementBasis(bell), f, prior);
  CHECK(b.gain_worst <= 1.0 + 1e-12);

  CHECK_THROWS_AS(info_account(MeasurementBasis(bell), f, ProbabilityDistribution({0.7, 0.1, 0.1, 0.1})), Error);
  CHECK(expected_gain(bell, f) == doctest::Approx(b.gain_expected).epsilon(1e-12));
}

TEST_CASE("parity basis") {
  const EncodingFamily f = explicit_single_bit_family();
  const MeasurementBasis p = parity_basis();
  const InfoAccount acc = info_account(p, f, ProbabilityDistribution::uniform(4));
  CHECK(acc.gain_expected <= 1.0 + 1e-12);
  CHECK(acc.gain_worst <= 1.0 + 1e-12);

  // Outcomes 0 and 1 fix d0 ⊕ d1 for either announced encoding.
  SeededRng rng(0);
  for (std::uint64_t c = 0; c < 4; ++c) {
    const DatabaseState db = DatabaseState::from_configuration(2, 1, c);
    for (int i = 0; i < 2; ++i) {
      const ProbabilityDistribution out = outcome_distribution(vendor_encode(db, f, i), p);
      for (Index o = 0; o < 2; ++o) {
        if (out[static_cast<std::size_t>(o)] < 1e-12) continue;
        const ProbabilityDistribution post = posterior(p, f, i, o, ProbabilityDistribution::uniform(4));
        double odd = post[1] + post[2];
        CHECK((odd < 1e-9 || odd > 1.0 - 1e-9));
        CHECK((odd > 0.5) == (std::popcount(c) % 2 == 1));
      }
    }
  }
  CHECK_THROWS_AS(measurement_for(ParityStrategy{}, EncodingFamily(mub_family(3, 1))), Error);
}

TEST_CASE("honest measurement always decodes the chosen item") {
  std::vector<EncodingFamily> families;
  families.push_back(explicit_single_bit_family());
  families.push_back(walsh_family(3));
  families.push_back(EncodingFamily(mub_family(3, 1)));
  families.push_back(EncodingFamily(mub_family(3, 2)));
  families.push_back(EncodingFamily(mub_family(3, 3)));
  families.push_back(EncodingFamily(cyclic_family(3, 2)));
  SeededRng rng(1);
  families.push_back(EncodingFamily(random_family(4, 2, rng)));
  for (const EncodingFamily& f : families) {
    const Index n = f.dim();
    for (int j = 0; j < f.k(); ++j) {
      const MeasurementBasis basis = honest_basis(f, j);
      for (int i = 0; i < f.k(); ++i) {
        const ComplexMatrix g = basis.matrix() * f.encoder(i);
        for (Index d = 0; d < n; ++d) {
          const std::uint64_t want = extract_block(static_cast<std::uint64_t>(d), f.k(), f.m(), j);
          for (Index o = 0; o < n; ++o) {
            if (std::norm(g(o, d)) > 1e-12) CHECK(decode_item(o, i, j, f.k(), f.m()) == want);
          }
        }
      }
    }
  }
}

TEST_CASE("honest leakage matches the dense oracle") {
  SeededRng rng(6);
  std::vector<EncodingFamily> families;
  families.push_back(explicit_single_bit_family());
  families.push_back(EncodingFamily(mub_family(3, 1)));
  families.push_back(EncodingFamily(random_family(2, 2, rng)));
  families.push_back(EncodingFamily(random_family(3, 1, rng)));
  families.push_back(EncodingFamily(tensorized_family(2, 2, 2, rng)));
  for (const EncodingFamily& f : families) {
    for (int j = 0; j < f.k(); ++j) {
      const std::vector<double> fast = honest_leakage_per_item(f, j);
      const std::vector<double> slow = dense_leakage(f, j);
      for (int t = 0; t < f.k(); ++t) CHECK(fast[t] == doctest::Approx(slow[t]).epsilon(1e-10));
    }
  }
  CHECK(honest_leakage(EncodingFamily(mub_family(3, 2)), 1) == doctest::Approx(0.0).epsilon(1e-12));
  SeededRng r2(2);
  CHECK(honest_leakage(EncodingFamily(random_family(2, 1, r2)), 0) > 1e-6);
}

TEST_CASE("sessions are deterministic and consistent") {
  const EncodingFamily f = EncodingFamily(mub_family(3, 1));
  const DatabaseState db(3, 1, {1, 0, 1});
  for (const Strategy& s : std::vector<Strategy>{HonestStrategy{2}, InvertStrategy{1}}) {
    SeededRng r1(77), r2(77);
    const SessionTranscript a = run_session(db, f, s, r1);
    const SessionTranscript b = run_session(db, f, s, r2);
    CHECK(a.dump() == b.dump());
    CHECK(transcript_posterior_consistent(a, measurement_for(s, f).matrix()));
    REQUIRE(a.events.size() == 4);
    CHECK(a.events[0].kind == EventKind::state_sent);
    CHECK(a.events[3].kind == EventKind::decoded);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    const SessionTranscript t = run_session(db, f, HonestStrategy{0}, rng);
    CHECK(t.decoded["value"] == 1);
  }
  // Inverting the announced encoding yields the whole database.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    const SessionTranscript t = run_session(db, f, InvertStrategy{0}, rng);
    if (t.announced == 0) CHECK(t.decoded["configuration"] == db.configuration());
  }
}

TEST_CASE("typestate steps cannot be repeated") {
  const EncodingFamily f = explicit_single_bit_family();
  const DatabaseState db(2, 1, {1, 1});
  SeededRng rng(3);
  session::TransmittedSession sent(f, db, rng);
  const MeasurementBasis basis = honest_basis(f, 0);
  session::MeasuredSession measured = std::move(sent).commit_measurement(basis, rng);
  CHECK_THROWS_AS(std::move(sent).commit_measurement(basis, rng), Error);
  session::Announced done = std::move(measured).announce();
  CHECK_THROWS_AS(std::move(measured).announce(), Error);
  CHECK(decode_item(done.outcome, done.encoding, 0, 2, 1) == 1);
}

TEST_CASE("sampling frequencies") {
  SeededRng rng(10);
  const ProbabilityDistribution p({0.1, 0.0, 0.6, 0.3});
  const int draws = 20000;
  std::vector<int> count(4, 0);
  for (int i = 0; i < draws; ++i) ++count[static_cast<std::size_t>(sample_index(p, rng))];
  CHECK(count[1] == 0);
  for (std::size_t i = 0; i < 4; ++i) {
    const double sigma = std::sqrt(p[i] * (1 - p[i]) / draws);
    CHECK(std::abs(count[i] / double(draws) - p[i]) <= 3.0 * sigma + 1e-12);
  }
}
