#pragma once

// Hardening layers on top of the basic exchange:
//  * XOR share splitting: each item is the XOR of r shares and the protocol
//    runs once per share tuple, so learning every item needs r correct
//    encoding guesses.
//  * GF(2^m) affine masking: items are sent as a·d + b and (a, b) is
//    announced with the encoding.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "obliq/encodings.hpp"
#include "obliq/gf2m.hpp"
#include "obliq/protocol.hpp"

namespace obliq {

struct XorShares {
  int m = 0;
  /// rounds × items; the XOR down each column is the original item.
  std::vector<std::vector<std::uint64_t>> shares;

  int rounds() const { return static_cast<int>(shares.size()); }
};

/// r − 1 uniformly random share tuples plus one closing tuple.
XorShares xor_split(const std::vector<std::uint64_t>& items, int m, int rounds, SeededRng& rng);
std::vector<std::uint64_t> xor_reconstruct(const XorShares& shares);

class GfMask {
 public:
  /// a must be nonzero; a and b must fit in m bits.
  GfMask(int m, gf::Element a, gf::Element b);

  static GfMask identity(int m) { return GfMask(m, 1, 0); }
  static GfMask random(int m, SeededRng& rng);
  static GfMask from_json(const nlohmann::json& j);

  int m() const { return m_; }
  gf::Element a() const { return a_; }
  gf::Element b() const { return b_; }
  std::uint32_t modulus() const { return gf::modulus(m_); }

  /// {m, a, b, modulus}
  nlohmann::json to_json() const;

 private:
  int m_;
  gf::Element a_;
  gf::Element b_;
};

std::uint64_t gf_mask(std::uint64_t d, const GfMask& mask);
std::uint64_t gf_unmask(std::uint64_t masked, const GfMask& mask);

/// Two-item session on the masked items; the announcement carries the mask
/// and an honest decode is unmasked before it is recorded.
SessionTranscript masked_session(const DatabaseState& db, const EncodingFamily& family, const GfMask& mask,
                                 const Strategy& strategy, SeededRng& rng);

struct HardenedResult {
  XorShares shares;
  std::optional<GfMask> mask;
  std::vector<SessionTranscript> rounds;
  /// Honest strategies only: XOR of the per-round decodes, unmasked.
  std::optional<std::uint64_t> recovered;

  nlohmann::json to_json() const;
};

/// Masks (optionally), splits into `rounds` share tuples and runs one
/// session per tuple.
HardenedResult hardened_session(const DatabaseState& db, const EncodingFamily& family, const Strategy& strategy,
                                int rounds, const std::optional<GfMask>& mask, SeededRng& rng);

struct XorAttackReport {
  int rounds = 0;
  int trials = 0;
  int successes = 0;
  double frequency = 0.0;
  double expected = 0.0;  // 2^-r
  double sigma = 0.0;     // binomial standard deviation of the frequency
  bool within_3_sigma = false;
};

/// A cheating user guesses the encoding in every round and inverts it; the
/// attack succeeds when every round leaves the share tuple certain.
XorAttackReport xor_attack_experiment(const EncodingFamily& family, int rounds, int trials, SeededRng& rng);

struct BitTargetingReport {
  int m = 0;
  int target_bit = 0;
  int samples = 0;
  /// Mean posterior entropy of each bit of d_0 (bit 0 = least significant).
  std::vector<double> mean_bit_entropy;
  double min_entropy = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// The user learns exactly bit `target_bit` of the masked item d_0' (via an
/// honest session) and then hears (a, b); reports how much each bit of d_0
/// is pinned down.
BitTargetingReport bit_targeting_audit(const EncodingFamily& family, int target_bit, int samples, double threshold,
                                       SeededRng& rng);

}  // namespace obliq
