#include <doctest.h>

#include <cmath>
#include <set>

#include "obliq/hardening.hpp"

using namespace obliq;

TEST_CASE("xor shares round trip") {
  SeededRng rng(1);
  for (int m = 1; m <= 3; ++m) {
    for (int rounds = 1; rounds <= 4; ++rounds) {
      for (std::uint64_t a = 0; a < (1U << m); ++a) {
        for (std::uint64_t b = 0; b < (1U << m); ++b) {
          const XorShares s = xor_split({a, b}, m, rounds, rng);
          CHECK(s.rounds() == rounds);
          for (const auto& tuple : s.shares) {
            for (std::uint64_t v : tuple) CHECK(v < (1U << m));
          }
          CHECK(xor_reconstruct(s) == std::vector<std::uint64_t>{a, b});
        }
      }
    }
  }
  CHECK_THROWS_AS(xor_split({4, 0}, 2, 2, rng), Error);
  CHECK_THROWS_AS(xor_split({1, 0}, 2, 0, rng), Error);
}

TEST_CASE("xor shares are uniform in each round but the last") {
  // With two rounds, the first share of item 0 is uniform whatever the item.
  SeededRng rng(2);
  const int draws = 8000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += static_cast<int>(xor_split({1, 1}, 1, 2, rng).shares[0][0]);
  const double sigma = std::sqrt(0.25 / draws);
  CHECK(std::abs(ones / double(draws) - 0.5) <= 3.0 * sigma);
}

TEST_CASE("affine masks are bijections") {
  for (int m = 1; m <= 8; ++m) {
    const std::uint32_t size = 1U << m;
    for (gf::Element a = 1; a < size; a += (m > 4 ? 37 : 1)) {
      for (gf::Element b = 0; b < size; b += (m > 4 ? 53 : 1)) {
        const GfMask mask(m, a, b);
        std::set<std::uint64_t> images;
        for (std::uint64_t d = 0; d < size; ++d) {
          const std::uint64_t x = gf_mask(d, mask);
          images.insert(x);
          CHECK(gf_unmask(x, mask) == d);
        }
        CHECK(images.size() == size);
      }
    }
  }
  CHECK_THROWS_AS(GfMask(3, 0, 1), Error);
  CHECK_THROWS_AS(GfMask(3, 8, 1), Error);
  CHECK_THROWS_AS(GfMask(3, 1, 8), Error);
  const GfMask m(4, 7, 9);
  const GfMask back = GfMask::from_json(m.to_json());
  CHECK(back.a() == 7);
  CHECK(back.b() == 9);
  CHECK(m.to_json()["modulus"] == 0b10011);
  nlohmann::json bad = m.to_json();
  bad["modulus"] = 0b11001;
  CHECK_THROWS_AS(GfMask::from_json(bad), Error);
}

TEST_CASE("masked sessions decode the original item") {
  for (int m = 1; m <= 3; ++m) {
    const EncodingFamily f = m == 1 ? explicit_single_bit_family() : walsh_family(m);
    SeededRng rng(static_cast<std::uint64_t>(m));
    for (std::uint64_t a = 0; a < (1U << m); ++a) {
      for (std::uint64_t b = 0; b < (1U << m); ++b) {
        const DatabaseState db(2, m, {a, b});
        const GfMask mask = GfMask::random(m, rng);
        for (int choice = 0; choice < 2; ++choice) {
          const SessionTranscript t = masked_session(db, f, mask, HonestStrategy{choice}, rng);
          CHECK(t.decoded["value"] == db.item(choice));
          CHECK(t.events[2].payload["mask"] == mask.to_json());
        }
      }
    }
  }
  SeededRng rng(0);
  CHECK_THROWS_AS(masked_session(DatabaseState(2, 2, {0, 0}), walsh_family(2), GfMask(3, 1, 0), HonestStrategy{0}, rng),
                  Error);
}

TEST_CASE("identity mask changes only the announcement") {
  const EncodingFamily f = walsh_family(2);
  const DatabaseState db(2, 2, {3, 1});
  SeededRng r1(5), r2(5);
  const SessionTranscript plain = run_session(db, f, HonestStrategy{1}, r1);
  const SessionTranscript masked = masked_session(db, f, GfMask::identity(2), HonestStrategy{1}, r2);
  CHECK(plain.outcome == masked.outcome);
  CHECK(plain.announced == masked.announced);
  CHECK(plain.decoded == masked.decoded);
  CHECK(plain.posterior == masked.posterior);
  nlohmann::json stripped = masked.to_json();
  stripped["events"][2].erase("mask");
  CHECK(stripped == plain.to_json());
}

TEST_CASE("hardened sessions recover the item") {
  const EncodingFamily f = walsh_family(3);
  SeededRng rng(8);
  for (int rounds = 1; rounds <= 4; ++rounds) {
    for (bool use_mask : {false, true}) {
      const DatabaseState db(2, 3, {rng.below(8), rng.below(8)});
      std::optional<GfMask> mask;
      if (use_mask) mask = GfMask::random(3, rng);
      const HardenedResult r = hardened_session(db, f, HonestStrategy{1}, rounds, mask, rng);
      REQUIRE(r.recovered.has_value());
      CHECK(*r.recovered == db.item(1));
      CHECK(static_cast<int>(r.rounds.size()) == rounds);
      const nlohmann::json j = r.to_json();
      if (rounds == 1) {
        CHECK(j.contains("events"));
      } else {
        CHECK(j["xor_rounds"] == rounds);
        CHECK(j["recovered"] == db.item(1));
        CHECK(j.contains("mask") == use_mask);
      }
    }
  }
  const HardenedResult cheat = hardened_session(DatabaseState(2, 3, {1, 2}), f, InvertStrategy{0}, 2, std::nullopt, rng);
  CHECK_FALSE(cheat.recovered.has_value());
}

TEST_CASE("xor attack succeeds with probability 2^-r") {
  const EncodingFamily f = explicit_single_bit_family();
  SeededRng rng(13);
  for (int rounds = 1; rounds <= 4; ++rounds) {
    const XorAttackReport r = xor_attack_experiment(f, rounds, 4000, rng);
    CHECK(r.expected == doctest::Approx(std::ldexp(1.0, -rounds)));
    CHECK(r.within_3_sigma);
    CHECK(std::abs(r.frequency - r.expected) <= 3.0 * std::sqrt(r.expected * (1 - r.expected) / 4000.0));
  }
}

TEST_CASE("a single observed masked bit says little about any bit of the item") {
  // Bit β of a·x + b is a nonzero GF(2)-linear functional of x; for random a
  // it is each of the 2^m − 1 nonzero functionals equally often, and it pins
  // bit t of x exactly when it is the coordinate functional. So the mean
  // entropy of every bit is 1 − 1/(2^m − 1).
  const EncodingFamily f = walsh_family(4);
  SeededRng rng(4);
  const BitTargetingReport r = bit_targeting_audit(f, 2, 3000, 0.9, rng);
  CHECK(r.passed);
  CHECK(r.min_entropy >= 0.9);
  for (double h : r.mean_bit_entropy) CHECK(std::abs(h - 14.0 / 15.0) <= 3.0 * std::sqrt((14.0 / 225.0) / 3000.0));
  CHECK_THROWS_AS(bit_targeting_audit(f, 4, 10, 0.9, rng), Error);
}
