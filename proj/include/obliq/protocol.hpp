#pragma once

// Vendor/user session engine: encode, transmit, measure, announce, decode,
// and the information accounting that goes with it.
//
// A projective measurement is a unitary M whose rows are the measurement
// bras: outcome j has probability |(M e)_j|^2. Under a uniform prior the
// posterior after outcome j and announced encoding i is
// P(d | j, i) = |(M E_i)_{j,d}|^2.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "obliq/encodings.hpp"
#include "obliq/qmath.hpp"

namespace obliq {

/// k items of m bits; item 0 is the most significant block of the
/// configuration index.
class DatabaseState {
 public:
  DatabaseState(int k, int m, std::vector<std::uint64_t> items);

  static DatabaseState from_configuration(int k, int m, std::uint64_t configuration);
  /// Hex digits, most significant first; leading zeros are allowed.
  static DatabaseState from_hex(int k, int m, std::string_view hex);

  int k() const { return k_; }
  int m() const { return m_; }
  std::uint64_t item(int i) const { return items_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::uint64_t>& items() const { return items_; }
  std::uint64_t configuration() const { return configuration_; }

 private:
  int k_;
  int m_;
  std::vector<std::uint64_t> items_;
  std::uint64_t configuration_ = 0;
};

enum class BasisLabel { honest, invert, parity, custom };

class MeasurementBasis {
 public:
  /// Throws unless the matrix is unitary within kUnitaryTol.
  explicit MeasurementBasis(ComplexMatrix matrix, BasisLabel label = BasisLabel::custom, int index = -1);

  const ComplexMatrix& matrix() const { return matrix_; }
  BasisLabel label() const { return label_; }
  /// j for honest bases, the guessed encoding for invert bases, else −1.
  int index() const { return index_; }
  Index dim() const { return matrix_.rows(); }
  std::string describe() const;

 private:
  ComplexMatrix matrix_;
  BasisLabel label_;
  int index_;
};

struct HonestStrategy {
  int choice;
};
struct InvertStrategy {
  int guess;
};
struct ParityStrategy {};
using Strategy = std::variant<HonestStrategy, InvertStrategy, ParityStrategy>;

MeasurementBasis measurement_for(const Strategy& strategy, const EncodingFamily& family);
std::string describe(const Strategy& strategy);

struct InfoAccount {
  std::vector<std::vector<double>> h_cond;  // [outcome j][encoding i]
  std::vector<double> h_avg;                // [outcome j]
  std::vector<double> gain;                 // log n − h_avg[j]
  double gain_worst = 0.0;
  double gain_expected = 0.0;
};

QuantumState vendor_encode(const DatabaseState& db, const EncodingFamily& family, int i);

ProbabilityDistribution outcome_distribution(const QuantumState& state, const MeasurementBasis& basis);
Index sample_outcome(const QuantumState& state, const MeasurementBasis& basis, SeededRng& rng);
/// Inverse-CDF draw from an arbitrary distribution.
Index sample_index(const ProbabilityDistribution& p, SeededRng& rng);

ProbabilityDistribution posterior(const MeasurementBasis& basis, const EncodingFamily& family, int i, Index j,
                                  const ProbabilityDistribution& prior);

/// Uniform prior only; any other prior is rejected.
InfoAccount info_account(const MeasurementBasis& basis, const EncodingFamily& family,
                         const ProbabilityDistribution& prior);
/// Expected gain without building the full account; no validation of M.
double expected_gain(const ComplexMatrix& m, const EncodingFamily& family);

/// M_j = (A_j†)^{⊗k}.
MeasurementBasis honest_basis(const EncodingFamily& family, int j);

std::uint64_t decode_item(std::uint64_t outcome, int announced, int choice, int k, int m);

/// Entangled two-qubit basis whose outcomes 0 and 1 fix d_0 ⊕ d_1 once the
/// encoding is announced (explicit single-bit family).
MeasurementBasis parity_basis();

/// Expected information (bits) an honest user measuring with M_j gains about
/// the items other than j.
double honest_leakage(const EncodingFamily& family, int j);
/// Same, split per item; entry j is 0.
std::vector<double> honest_leakage_per_item(const EncodingFamily& family, int j);
/// Item-level form; needs only the k item bases.
std::vector<double> honest_leakage_per_item(const ItemBasisFamily& basis, int j);

// ---------------------------------------------------------------------------
// Sessions

enum class EventKind { state_sent, measurement_committed, encoding_announced, decoded };
std::string_view to_string(EventKind kind);

struct SessionEvent {
  EventKind kind;
  std::uint64_t tick;
  nlohmann::json payload;
};

struct SessionTranscript {
  int k = 0;
  int m = 0;
  nlohmann::json family;
  std::string strategy;
  std::vector<SessionEvent> events;
  Index outcome = 0;
  int announced = 0;
  std::vector<double> posterior;
  nlohmann::json decoded;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// Canonical text form; identical transcripts give identical bytes.
  std::string dump() const;
};

/// Rebuilds the posterior from the transcript's own record (basis matrix,
/// announced encoding, outcome) and compares it with the stored one.
bool transcript_posterior_consistent(const SessionTranscript& t, const ComplexMatrix& basis, double tol = 1e-12);

namespace session {

class MeasuredSession;
struct Announced;

/// The vendor's encoding choice. Nothing outside MeasuredSession can read it,
/// so the measurement step never sees it.
class SealedEncoding {
 public:
  explicit SealedEncoding(int value) : value_(value) {}

 private:
  int value_;
  friend class MeasuredSession;
};

/// State on the channel; the next step must commit a measurement.
class TransmittedSession {
 public:
  TransmittedSession(const EncodingFamily& family, const DatabaseState& db, SeededRng& rng);

  const QuantumState& state() const { return state_; }
  MeasuredSession commit_measurement(const MeasurementBasis& basis, SeededRng& rng) &&;

 private:
  TransmittedSession(const EncodingFamily& family, const DatabaseState& db, int encoding);

  const EncodingFamily* family_;
  SealedEncoding sealed_;
  QuantumState state_;
  std::vector<SessionEvent> events_;
  bool consumed_ = false;
};

class MeasuredSession {
 public:
  Index outcome() const { return outcome_; }
  const QuantumState& post_measurement_state() const { return post_state_; }

  /// Opens the sealed encoding. extra_payload is merged into the
  /// announcement event.
  Announced announce(nlohmann::json extra_payload = nlohmann::json::object()) &&;

 private:
  friend class TransmittedSession;
  MeasuredSession(const EncodingFamily& family, SealedEncoding sealed, MeasurementBasis basis, Index outcome,
                  QuantumState post_state, std::vector<SessionEvent> events);

  const EncodingFamily* family_;
  SealedEncoding sealed_;
  MeasurementBasis basis_;
  Index outcome_;
  QuantumState post_state_;
  std::vector<SessionEvent> events_;
  bool consumed_ = false;
};

struct Announced {
  int encoding;
  Index outcome;
  ProbabilityDistribution posterior;
  std::vector<SessionEvent> events;
};

}  // namespace session

/// Optional adjustments used by the hardening layers.
struct SessionHooks {
  nlohmann::json announcement_payload = nlohmann::json::object();
  /// Applied to an honestly decoded item value before it is recorded.
  std::function<std::uint64_t(std::uint64_t)> item_decoder;
};

SessionTranscript run_session(const DatabaseState& db, const EncodingFamily& family, const Strategy& strategy,
                              SeededRng& rng, const SessionHooks& hooks = {});

}  // namespace obliq
