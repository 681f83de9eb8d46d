#include "obliq/protocol.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cctype>
#include <cmath>
#include <numbers>

namespace obliq {

namespace {

constexpr double kZeroProbability = 1e-15;

void require_dims(const EncodingFamily& family, Index dim, const char* what) {
  if (family.dim() != dim) {
    throw Error(std::string(what) + ": dimension " + std::to_string(dim) + " does not match family dimension " +
                std::to_string(family.dim()));
  }
}

std::vector<double> squared_magnitudes(const ComplexVector& v) {
  std::vector<double> p(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(v(i));
  return p;
}

nlohmann::json amplitudes_to_json(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

// Posterior after outcome j of M under encoding i with a uniform prior: the
// squared magnitudes of row j of M·E_i.
std::vector<double> uniform_posterior_row(const ComplexMatrix& m, const ComplexMatrix& encoder, Index j) {
  const Eigen::RowVectorXcd row = m.row(j) * encoder;
  std::vector<double> p(static_cast<std::size_t>(row.size()));
  for (Index d = 0; d < row.size(); ++d) p[static_cast<std::size_t>(d)] = std::norm(row(d));
  return p;
}

// Decoded payload for a posterior: the configuration if it is certain, else
// nothing.
nlohmann::json certain_configuration(const ProbabilityDistribution& post, int k, int m) {
  for (std::size_t d = 0; d < post.size(); ++d) {
    if (post[d] >= 1.0 - 1e-9) {
      nlohmann::json items = nlohmann::json::array();
      for (int t = 0; t < k; ++t) items.push_back(extract_block(d, k, m, t));
      return {{"configuration", d}, {"items", items}};
    }
  }
  return nullptr;
}

nlohmann::json certain_parity(const ProbabilityDistribution& post) {
  double even = 0.0;
  for (std::size_t d = 0; d < post.size(); ++d) {
    if (std::popcount(d) % 2 == 0) even += post[d];
  }
  if (even >= 1.0 - 1e-9) return {{"parity", 0}};
  if (even <= 1e-9) return {{"parity", 1}};
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// DatabaseState

DatabaseState::DatabaseState(int k, int m, std::vector<std::uint64_t> items) : k_(k), m_(m), items_(std::move(items)) {
  if (k < 1 || m < 1) throw Error("database: k and m must be positive");
  if (k * m > 62) throw Error("database: km too large");
  if (static_cast<int>(items_.size()) != k) throw Error("database: expected " + std::to_string(k) + " items");
  for (std::uint64_t v : items_) {
    if (v >> m) throw Error("database: item value " + std::to_string(v) + " does not fit in " + std::to_string(m) + " bits");
    configuration_ = (configuration_ << m) | v;
  }
}

DatabaseState DatabaseState::from_configuration(int k, int m, std::uint64_t configuration) {
  if (k < 1 || m < 1 || k * m > 62) throw Error("database: invalid k, m");
  if (configuration >> (k * m)) throw Error("database: configuration exceeds 2^(km)");
  std::vector<std::uint64_t> items;
  for (int t = 0; t < k; ++t) items.push_back(extract_block(configuration, k, m, t));
  return DatabaseState(k, m, std::move(items));
}

DatabaseState DatabaseState::from_hex(int k, int m, std::string_view hex) {
  if (hex.empty()) throw Error("database: empty hex string");
  std::uint64_t value = 0;
  int significant = 0;
  for (char c : hex) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw Error("database: '" + std::string(hex) + "' is not hex");
    const int digit = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
    if (significant > 0 || digit != 0) ++significant;
    if (significant > 16) throw Error("database: hex value too large");
    value = (value << 4) | static_cast<std::uint64_t>(digit);
  }
  if (k * m < 64 && (value >> (k * m)) != 0) {
    throw Error("database: value 0x" + std::string(hex) + " does not fit in km = " + std::to_string(k * m) + " bits");
  }
  return from_configuration(k, m, value);
}

// ---------------------------------------------------------------------------
// Measurement bases and strategies

MeasurementBasis::MeasurementBasis(ComplexMatrix matrix, BasisLabel label, int index)
    : matrix_(std::move(matrix)), label_(label), index_(index) {
  if (matrix_.rows() != matrix_.cols() || !is_unitary(matrix_)) {
    throw Error("measurement basis is not unitary");
  }
}

std::string MeasurementBasis::describe() const {
  switch (label_) {
    case BasisLabel::honest: return "honest(" + std::to_string(index_) + ")";
    case BasisLabel::invert: return "invert(" + std::to_string(index_) + ")";
    case BasisLabel::parity: return "parity";
    case BasisLabel::custom: return "custom";
  }
  return "custom";
}

MeasurementBasis measurement_for(const Strategy& strategy, const EncodingFamily& family) {
  return std::visit(
      [&](const auto& s) -> MeasurementBasis {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HonestStrategy>) {
          return honest_basis(family, s.choice);
        } else if constexpr (std::is_same_v<T, InvertStrategy>) {
          return MeasurementBasis(family.encoder(s.guess).adjoint(), BasisLabel::invert, s.guess);
        } else {
          if (family.k() != 2 || family.m() != 1) throw Error("parity strategy needs k = 2, m = 1");
          return parity_basis();
        }
      },
      strategy);
}

std::string describe(const Strategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HonestStrategy>) return "honest(" + std::to_string(s.choice) + ")";
        else if constexpr (std::is_same_v<T, InvertStrategy>) return "invert(" + std::to_string(s.guess) + ")";
        else return "parity";
      },
      strategy);
}

MeasurementBasis honest_basis(const EncodingFamily& family, int j) {
  if (j < 0 || j >= family.k()) throw Error("honest_basis: choice " + std::to_string(j) + " out of range");
  return MeasurementBasis(tensor_power(family.basis()[j].adjoint(), family.k()), BasisLabel::honest, j);
}

MeasurementBasis parity_basis() {
  const double h = 0.5;
  const double s = 1.0 / std::numbers::sqrt2;
  ComplexMatrix m(4, 4);
  // clang-format off
  m << h,  h,  h, -h,
       h,  h, -h,  h,
       s, -s,  0,  0,
       0,  0,  s,  s;
  // clang-format on
  return MeasurementBasis(std::move(m), BasisLabel::parity);
}

// ---------------------------------------------------------------------------
// Encoding, measurement, inference

QuantumState vendor_encode(const DatabaseState& db, const EncodingFamily& family, int i) {
  if (db.k() != family.k() || db.m() != family.m()) throw Error("vendor_encode: database shape does not match family");
  const ComplexMatrix& e = family.encoder(i);
  return QuantumState(e.col(static_cast<Index>(db.configuration())));
}

ProbabilityDistribution outcome_distribution(const QuantumState& state, const MeasurementBasis& basis) {
  if (state.dim() != basis.dim()) throw Error("outcome_distribution: dimension mismatch");
  return ProbabilityDistribution(squared_magnitudes(basis.matrix() * state.amplitudes()));
}

Index sample_index(const ProbabilityDistribution& p, SeededRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Index last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last_positive = static_cast<Index>(i);
    if (u < acc) return last_positive;
  }
  // u landed in the roundoff gap above the cumulative sum.
  return last_positive;
}

Index sample_outcome(const QuantumState& state, const MeasurementBasis& basis, SeededRng& rng) {
  return sample_index(outcome_distribution(state, basis), rng);
}

ProbabilityDistribution posterior(const MeasurementBasis& basis, const EncodingFamily& family, int i, Index j,
                                  const ProbabilityDistribution& prior) {
  require_dims(family, basis.dim(), "posterior");
  if (static_cast<Index>(prior.size()) != family.dim()) throw Error("posterior: prior has wrong support size");
  if (j < 0 || j >= basis.dim()) throw Error("posterior: outcome out of range");
  const std::vector<double> likelihood = uniform_posterior_row(basis.matrix(), family.encoder(i), j);
  std::vector<double> joint(likelihood.size());
  double total = 0.0;
  for (std::size_t d = 0; d < joint.size(); ++d) {
    joint[d] = likelihood[d] * prior[d];
    total += joint[d];
  }
  if (total < kZeroProbability) throw Error("posterior: outcome has zero probability under the prior");
  for (double& x : joint) x /= total;
  return ProbabilityDistribution(std::move(joint));
}

InfoAccount info_account(const MeasurementBasis& basis, const EncodingFamily& family,
                         const ProbabilityDistribution& prior) {
  require_dims(family, basis.dim(), "info_account");
  if (static_cast<Index>(prior.size()) != family.dim() || !prior.is_uniform()) {
    throw Error("info_account: unsupported prior (only the uniform prior is handled)");
  }
  const Index n = family.dim();
  const int k = family.k();
  const double log_n = std::log2(static_cast<double>(n));
  InfoAccount acc;
  acc.h_cond.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
  std::vector<std::vector<double>> outcome_given_encoding(static_cast<std::size_t>(n),
                                                          std::vector<double>(static_cast<std::size_t>(k)));
  for (int i = 0; i < k; ++i) {
    const ComplexMatrix g = basis.matrix() * family.encoder(i);
    for (Index j = 0; j < n; ++j) {
      std::vector<double> row = squared_magnitudes(g.row(j).transpose());
      double mass = 0.0;
      for (double x : row) mass += x;
      outcome_given_encoding[j][i] = mass / static_cast<double>(n);
      acc.h_cond[j][i] = shannon_entropy(row);
    }
  }
  // Uniform prior: P(j | i) = 1/n for every i, hence P(i | j) = 1/k.
  for (Index j = 0; j < n; ++j) {
    for (int i = 0; i < k; ++i) {
      if (std::abs(outcome_given_encoding[j][i] * static_cast<double>(n) - 1.0) > 1e-9) {
        throw Error("info_account: outcome probabilities are not uniform; basis or encoder not unitary");
      }
    }
  }
  acc.h_avg.resize(static_cast<std::size_t>(n));
  acc.gain.resize(static_cast<std::size_t>(n));
  acc.gain_worst = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    double sum = 0.0;
    for (double h : acc.h_cond[j]) sum += h;
    acc.h_avg[j] = sum / k;
    acc.gain[j] = log_n - acc.h_avg[j];
    acc.gain_worst = std::max(acc.gain_worst, acc.gain[j]);
    acc.gain_expected += acc.gain[j] / static_cast<double>(n);
  }
  return acc;
}

double expected_gain(const ComplexMatrix& m, const EncodingFamily& family) {
  const Index n = family.dim();
  double entropy = 0.0;
  for (int i = 0; i < family.k(); ++i) {
    const ComplexMatrix g = m * family.encoder(i);
    for (Index j = 0; j < n; ++j) {
      for (Index d = 0; d < n; ++d) {
        const double p = std::norm(g(j, d));
        if (p > 0.0) entropy -= p * std::log2(p);
      }
    }
  }
  return std::log2(static_cast<double>(n)) - entropy / (static_cast<double>(n) * family.k());
}

std::uint64_t decode_item(std::uint64_t outcome, int announced, int choice, int k, int m) {
  const int position = ((choice - announced) % k + k) % k;
  return extract_block(outcome, k, m, position);
}

std::vector<double> honest_leakage_per_item(const ItemBasisFamily& basis, int j) {
  if (j < 0 || j >= basis.k()) throw Error("honest_leakage: choice out of range");
  // M_j C_i is the tensor product of A_j† A_t over item positions, so for
  // every announced i the posterior is a product over items and item t's
  // factor is row o_t of |A_j† A_t|^2, with o_t uniform. The expected
  // remaining entropy of item t is therefore the mean row entropy of that
  // matrix, independent of i.
  const int m = basis.m();
  std::vector<double> leak(static_cast<std::size_t>(basis.k()), 0.0);
  for (int t = 0; t < basis.k(); ++t) {
    if (t == j) continue;
    const ComplexMatrix overlap = basis[j].adjoint() * basis[t];
    double mean_entropy = 0.0;
    for (Index o = 0; o < overlap.rows(); ++o) mean_entropy += shannon_entropy(squared_magnitudes(overlap.row(o).transpose()));
    mean_entropy /= static_cast<double>(overlap.rows());
    leak[static_cast<std::size_t>(t)] = std::max(0.0, m - mean_entropy);
  }
  return leak;
}

std::vector<double> honest_leakage_per_item(const EncodingFamily& family, int j) {
  return honest_leakage_per_item(family.basis(), j);
}

double honest_leakage(const EncodingFamily& family, int j) {
  double total = 0.0;
  for (double x : honest_leakage_per_item(family, j)) total += x;
  return total;
}

// ---------------------------------------------------------------------------
// Sessions

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::state_sent: return "state_sent";
    case EventKind::measurement_committed: return "measurement_committed";
    case EventKind::encoding_announced: return "encoding_announced";
    case EventKind::decoded: return "decoded";
  }
  return "unknown";
}

nlohmann::json SessionTranscript::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["k"] = k;
  j["m"] = m;
  j["family"] = family;
  j["prior"] = "uniform";
  j["strategy"] = strategy;
  nlohmann::json ev = nlohmann::json::array();
  for (const SessionEvent& e : events) {
    nlohmann::json entry = {{"type", std::string(to_string(e.kind))}, {"tick", e.tick}};
    entry.update(e.payload);
    ev.push_back(std::move(entry));
  }
  j["events"] = std::move(ev);
  j["outcome"] = outcome;
  j["announced"] = announced;
  j["posterior"] = posterior;
  j["decoded"] = decoded;
  j["seed"] = seed;
  return j;
}

std::string SessionTranscript::dump() const { return to_json().dump(2) + "\n"; }

bool transcript_posterior_consistent(const SessionTranscript& t, const ComplexMatrix& basis, double tol) {
  const EncodingFamily family = family_from_descriptor(t.family);
  const ProbabilityDistribution recomputed =
      posterior(MeasurementBasis(basis), family, t.announced, t.outcome, ProbabilityDistribution::uniform(family.dim()));
  if (recomputed.size() != t.posterior.size()) return false;
  for (std::size_t d = 0; d < recomputed.size(); ++d) {
    if (std::abs(recomputed[d] - t.posterior[d]) > tol) return false;
  }
  return true;
}

namespace session {

TransmittedSession::TransmittedSession(const EncodingFamily& family, const DatabaseState& db, SeededRng& rng)
    : TransmittedSession(family, db, static_cast<int>(rng.below(static_cast<std::uint64_t>(family.k())))) {}

TransmittedSession::TransmittedSession(const EncodingFamily& family, const DatabaseState& db, int encoding)
    : family_(&family), sealed_(encoding), state_(vendor_encode(db, family, encoding)) {
  events_.push_back({EventKind::state_sent, 0, {{"amplitudes", amplitudes_to_json(state_.amplitudes())}}});
}

MeasuredSession TransmittedSession::commit_measurement(const MeasurementBasis& basis, SeededRng& rng) && {
  if (consumed_) throw Error("session: measurement already committed");
  consumed_ = true;
  const Index outcome = sample_outcome(state_, basis, rng);
  QuantumState post(basis.matrix().row(outcome).adjoint());
  events_.push_back({EventKind::measurement_committed, 1, {{"basis", basis.describe()}, {"outcome", outcome}}});
  return MeasuredSession(*family_, sealed_, basis, outcome, std::move(post), std::move(events_));
}

MeasuredSession::MeasuredSession(const EncodingFamily& family, SealedEncoding sealed, MeasurementBasis basis,
                                 Index outcome, QuantumState post_state, std::vector<SessionEvent> events)
    : family_(&family),
      sealed_(sealed),
      basis_(std::move(basis)),
      outcome_(outcome),
      post_state_(std::move(post_state)),
      events_(std::move(events)) {}

Announced MeasuredSession::announce(nlohmann::json extra_payload) && {
  if (consumed_) throw Error("session: encoding already announced");
  consumed_ = true;
  const int encoding = sealed_.value_;
  nlohmann::json payload = {{"encoding", encoding}};
  payload.update(extra_payload);
  events_.push_back({EventKind::encoding_announced, 2, std::move(payload)});
  ProbabilityDistribution post =
      posterior(basis_, *family_, encoding, outcome_, ProbabilityDistribution::uniform(family_->dim()));
  return Announced{encoding, outcome_, std::move(post), std::move(events_)};
}

}  // namespace session

SessionTranscript run_session(const DatabaseState& db, const EncodingFamily& family, const Strategy& strategy,
                              SeededRng& rng, const SessionHooks& hooks) {
  const MeasurementBasis basis = measurement_for(strategy, family);
  session::TransmittedSession sent(family, db, rng);
  session::MeasuredSession measured = std::move(sent).commit_measurement(basis, rng);
  session::Announced done = std::move(measured).announce(hooks.announcement_payload);

  nlohmann::json decoded = std::visit(
      [&](const auto& s) -> nlohmann::json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HonestStrategy>) {
          std::uint64_t value = decode_item(static_cast<std::uint64_t>(done.outcome), done.encoding, s.choice,
                                            family.k(), family.m());
          if (hooks.item_decoder) value = hooks.item_decoder(value);
          return {{"item", s.choice}, {"value", value}};
        } else if constexpr (std::is_same_v<T, InvertStrategy>) {
          return certain_configuration(done.posterior, family.k(), family.m());
        } else {
          return certain_parity(done.posterior);
        }
      },
      strategy);

  SessionTranscript t;
  t.k = family.k();
  t.m = family.m();
  t.family = family.descriptor();
  t.strategy = describe(strategy);
  t.events = std::move(done.events);
  t.events.push_back({EventKind::decoded, 3, {{"decoded", decoded}}});
  t.outcome = done.outcome;
  t.announced = done.encoding;
  t.posterior.assign(done.posterior.probabilities().begin(), done.posterior.probabilities().end());
  t.decoded = std::move(decoded);
  t.seed = rng.seed();
  return t;
}

}  // namespace obliq
