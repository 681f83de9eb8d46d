#include "obliq/hardening.hpp"

#include <array>
#include <cmath>

namespace obliq {

namespace {

std::uint64_t item_mask(int m) { return (std::uint64_t{1} << m) - 1; }

double binary_entropy(double p) {
  const std::array<double, 2> dist{p, 1.0 - p};
  return shannon_entropy(dist);
}

}  // namespace

XorShares xor_split(const std::vector<std::uint64_t>& items, int m, int rounds, SeededRng& rng) {
  if (rounds < 1) throw Error("xor_split: need at least one round");
  if (m < 1 || m > 62) throw Error("xor_split: m out of range");
  XorShares out;
  out.m = m;
  std::vector<std::uint64_t> closing = items;
  for (std::uint64_t v : items) {
    if (v & ~item_mask(m)) throw Error("xor_split: item does not fit in m bits");
  }
  for (int r = 0; r + 1 < rounds; ++r) {
    std::vector<std::uint64_t> tuple(items.size());
    for (std::size_t t = 0; t < items.size(); ++t) {
      tuple[t] = rng.below(std::uint64_t{1} << m);
      closing[t] ^= tuple[t];
    }
    out.shares.push_back(std::move(tuple));
  }
  out.shares.push_back(std::move(closing));
  return out;
}

std::vector<std::uint64_t> xor_reconstruct(const XorShares& shares) {
  if (shares.shares.empty()) throw Error("xor_reconstruct: no shares");
  std::vector<std::uint64_t> items(shares.shares.front().size(), 0);
  for (const auto& tuple : shares.shares) {
    if (tuple.size() != items.size()) throw Error("xor_reconstruct: ragged share tuples");
    for (std::size_t t = 0; t < items.size(); ++t) items[t] ^= tuple[t];
  }
  return items;
}

GfMask::GfMask(int m, gf::Element a, gf::Element b) : m_(m), a_(a), b_(b) {
  if (m < 1 || m > gf::kMaxDegree) throw Error("GfMask: field degree out of range");
  if (a == 0) throw Error("GfMask: a must be nonzero");
  if ((a >> m) != 0 || (b >> m) != 0) throw Error("GfMask: a and b must be elements of GF(2^m)");
}

GfMask GfMask::random(int m, SeededRng& rng) {
  const std::uint64_t size = std::uint64_t{1} << m;
  const auto a = static_cast<gf::Element>(1 + rng.below(size - 1));
  const auto b = static_cast<gf::Element>(rng.below(size));
  return GfMask(m, a, b);
}

GfMask GfMask::from_json(const nlohmann::json& j) {
  GfMask mask(j.at("m").get<int>(), j.at("a").get<gf::Element>(), j.at("b").get<gf::Element>());
  if (j.contains("modulus") && j["modulus"].get<std::uint32_t>() != mask.modulus()) {
    throw Error("GfMask: modulus does not match the built-in field");
  }
  return mask;
}

nlohmann::json GfMask::to_json() const { return {{"m", m_}, {"a", a_}, {"b", b_}, {"modulus", modulus()}}; }

std::uint64_t gf_mask(std::uint64_t d, const GfMask& mask) {
  if (d >> mask.m()) throw Error("gf_mask: value does not fit in m bits");
  return gf::add(gf::mul(mask.a(), static_cast<gf::Element>(d), mask.m()), mask.b());
}

std::uint64_t gf_unmask(std::uint64_t masked, const GfMask& mask) {
  if (masked >> mask.m()) throw Error("gf_unmask: value does not fit in m bits");
  return gf::mul(gf::inverse(mask.a(), mask.m()), gf::add(static_cast<gf::Element>(masked), mask.b()), mask.m());
}

SessionTranscript masked_session(const DatabaseState& db, const EncodingFamily& family, const GfMask& mask,
                                 const Strategy& strategy, SeededRng& rng) {
  if (family.k() != 2) throw Error("masked_session: needs k = 2");
  if (mask.m() != family.m()) throw Error("masked_session: mask field degree differs from m");
  std::vector<std::uint64_t> masked;
  for (std::uint64_t v : db.items()) masked.push_back(gf_mask(v, mask));
  SessionHooks hooks;
  hooks.announcement_payload = {{"mask", mask.to_json()}};
  hooks.item_decoder = [mask](std::uint64_t v) { return gf_unmask(v, mask); };
  return run_session(DatabaseState(db.k(), db.m(), std::move(masked)), family, strategy, rng, hooks);
}

HardenedResult hardened_session(const DatabaseState& db, const EncodingFamily& family, const Strategy& strategy,
                                int rounds, const std::optional<GfMask>& mask, SeededRng& rng) {
  if (mask && mask->m() != family.m()) throw Error("hardened_session: mask field degree differs from m");
  std::vector<std::uint64_t> items = db.items();
  if (mask) {
    for (std::uint64_t& v : items) v = gf_mask(v, *mask);
  }
  HardenedResult result;
  result.mask = mask;
  result.shares = xor_split(items, family.m(), rounds, rng);

  SessionHooks hooks;
  if (mask) hooks.announcement_payload = {{"mask", mask->to_json()}};
  // A single round decodes straight to the original item.
  if (mask && rounds == 1) hooks.item_decoder = [m = *mask](std::uint64_t v) { return gf_unmask(v, m); };

  const auto* honest = std::get_if<HonestStrategy>(&strategy);
  std::uint64_t folded = 0;
  for (const auto& tuple : result.shares.shares) {
    result.rounds.push_back(run_session(DatabaseState(db.k(), db.m(), tuple), family, strategy, rng, hooks));
    if (honest) folded ^= result.rounds.back().decoded.at("value").get<std::uint64_t>();
  }
  if (honest) result.recovered = (mask && rounds > 1) ? gf_unmask(folded, *mask) : folded;
  return result;
}

nlohmann::json HardenedResult::to_json() const {
  if (rounds.size() == 1) return rounds.front().to_json();
  nlohmann::json j;
  j["version"] = 1;
  j["xor_rounds"] = rounds.size();
  if (mask) j["mask"] = mask->to_json();
  nlohmann::json sessions = nlohmann::json::array();
  for (const SessionTranscript& t : rounds) sessions.push_back(t.to_json());
  j["sessions"] = std::move(sessions);
  j["recovered"] = recovered ? nlohmann::json(*recovered) : nlohmann::json(nullptr);
  return j;
}

XorAttackReport xor_attack_experiment(const EncodingFamily& family, int rounds, int trials, SeededRng& rng) {
  if (family.k() != 2) throw Error("xor_attack_experiment: needs a two-item family");
  if (trials < 1) throw Error("xor_attack_experiment: need at least one trial");
  const int m = family.m();
  XorAttackReport report;
  report.rounds = rounds;
  report.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    const std::vector<std::uint64_t> items{rng.below(std::uint64_t{1} << m), rng.below(std::uint64_t{1} << m)};
    const XorShares shares = xor_split(items, m, rounds, rng);
    bool all_certain = true;
    XorShares learned{m, {}};
    for (const auto& tuple : shares.shares) {
      const int guess = static_cast<int>(rng.below(2));
      const SessionTranscript t = run_session(DatabaseState(2, m, tuple), family, InvertStrategy{guess}, rng);
      if (t.decoded.is_null()) {
        all_certain = false;
        continue;
      }
      learned.shares.push_back(t.decoded.at("items").get<std::vector<std::uint64_t>>());
    }
    if (all_certain) {
      if (xor_reconstruct(learned) != items) throw Error("xor_attack_experiment: certain decode was wrong");
      ++report.successes;
    }
  }
  report.frequency = static_cast<double>(report.successes) / trials;
  report.expected = std::ldexp(1.0, -rounds);
  report.sigma = std::sqrt(report.expected * (1.0 - report.expected) / trials);
  report.within_3_sigma = std::abs(report.frequency - report.expected) <= 3.0 * report.sigma;
  return report;
}

BitTargetingReport bit_targeting_audit(const EncodingFamily& family, int target_bit, int samples, double threshold,
                                       SeededRng& rng) {
  if (family.k() != 2) throw Error("bit_targeting_audit: needs a two-item family");
  const int m = family.m();
  if (target_bit < 0 || target_bit >= m) throw Error("bit_targeting_audit: target bit out of range");
  if (samples < 1) throw Error("bit_targeting_audit: need at least one sample");
  const std::uint64_t size = std::uint64_t{1} << m;
  BitTargetingReport report;
  report.m = m;
  report.target_bit = target_bit;
  report.samples = samples;
  report.threshold = threshold;
  report.mean_bit_entropy.assign(static_cast<std::size_t>(m), 0.0);
  // Certified once; every sample measures with the same honest basis.
  const MeasurementBasis basis = honest_basis(family, 0);
  for (int s = 0; s < samples; ++s) {
    const DatabaseState db(2, m, {rng.below(size), rng.below(size)});
    const GfMask mask = GfMask::random(m, rng);
    std::vector<std::uint64_t> masked{gf_mask(db.item(0), mask), gf_mask(db.item(1), mask)};
    session::TransmittedSession sent(family, DatabaseState(2, m, std::move(masked)), rng);
    session::Announced done = std::move(sent).commit_measurement(basis, rng).announce();
    const std::uint64_t value = decode_item(static_cast<std::uint64_t>(done.outcome), done.encoding, 0, 2, m);
    const std::uint64_t observed = (value >> target_bit) & 1U;

    // After (a, b) is announced the user's posterior on d_0 is uniform over
    // the values consistent with the single observed bit.
    std::vector<int> ones(static_cast<std::size_t>(m), 0);
    int consistent = 0;
    for (std::uint64_t x = 0; x < size; ++x) {
      if (((gf_mask(x, mask) >> target_bit) & 1U) != observed) continue;
      ++consistent;
      for (int bit = 0; bit < m; ++bit) ones[static_cast<std::size_t>(bit)] += static_cast<int>((x >> bit) & 1U);
    }
    for (int bit = 0; bit < m; ++bit) {
      report.mean_bit_entropy[static_cast<std::size_t>(bit)] +=
          binary_entropy(static_cast<double>(ones[static_cast<std::size_t>(bit)]) / consistent);
    }
  }
  report.min_entropy = std::numeric_limits<double>::infinity();
  for (double& h : report.mean_bit_entropy) {
    h /= samples;
    report.min_entropy = std::min(report.min_entropy, h);
  }
  report.passed = report.min_entropy >= threshold;
  return report;
}

}  // namespace obliq
