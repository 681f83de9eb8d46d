#include "obliq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "obliq/parallel.hpp"

namespace obliq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 1024;

// Advances the caller's RNG once and returns a base for per-task streams.
SeededRng fork(SeededRng& rng) { return rng.derive(rng.below(std::numeric_limits<std::uint64_t>::max())); }

ComplexVector random_unit_vector(Index dim, SeededRng& rng) {
  ComplexVector u(dim);
  for (Index i = 0; i < dim; ++i) u(i) = Complex(rng.normal(), rng.normal());
  return u / u.norm();
}

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

ComplexMatrix fourier_matrix(Index n) {
  ComplexMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((r * c) % n) / static_cast<double>(n);
      f(r, c) = std::polar(scale, angle);
    }
  }
  return f;
}

ComplexMatrix hadamard_matrix(Index n) {
  if (is_power_of_two(n)) {
    int m = 0;
    while ((Index{1} << m) < n) ++m;
    return walsh_matrix(m);
  }
  return fourier_matrix(n);
}

// exp(i t H) from an eigendecomposition H = V diag(λ) V†, applied to w = V† M.
ComplexMatrix rotate(const Eigen::SelfAdjointEigenSolver<ComplexMatrix>& eig, const ComplexMatrix& w, double t) {
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  ComplexVector phase(lambda.size());
  for (Index r = 0; r < lambda.size(); ++r) phase(r) = std::polar(1.0, t * lambda(r));
  return eig.eigenvectors() * (phase.asDiagonal() * w);
}

ComplexMatrix exp_i_hermitian(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  return rotate(eig, eig.eigenvectors().adjoint(), 1.0);
}

ComplexMatrix random_hermitian(Index n, SeededRng& rng) {
  std::vector<double> theta(static_cast<std::size_t>(n * n));
  for (double& x : theta) x = rng.normal();
  return hermitian_from_parameters(theta, n);
}

struct RestartOutcome {
  ComplexMatrix m;
  double gain = -kInf;
};

RestartOutcome run_restart(const EncodingFamily& family, const OptimizerConfig& config, SeededRng rng,
                           bool honest_start) {
  const Index n = family.dim();
  RestartOutcome out;
  ComplexMatrix m = honest_start ? honest_basis(family, 0).matrix() : haar_unitary(n, rng);
  double gain = expected_gain(m, family);

  // Derivative-free (1+1) evolution strategy with the one-fifth rule.
  const int es_steps = config.iterations / 4;
  double sigma = 0.5;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  int step = 0;
  for (; step < es_steps && sigma > 1e-3; ++step) {
    const ComplexMatrix trial = exp_i_hermitian(random_hermitian(n, rng) * (sigma * scale)) * m;
    const double g = expected_gain(trial, family);
    if (g > gain) {
      m = trial;
      gain = g;
      sigma *= 1.5;
    } else {
      sigma *= 0.904;
    }
  }

  // Gradient ascent along exp(iηG) with Armijo backtracking.
  double eta = 1.0;
  int stalled = 0;
  ComplexMatrix grad;
  for (; step < config.iterations; ++step) {
    gain = expected_gain_with_gradient(m, family, &grad);
    const double g2 = grad.squaredNorm();
    if (g2 < 1e-20) break;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(grad);
    const ComplexMatrix w = eig.eigenvectors().adjoint() * m;
    bool accepted = false;
    ComplexMatrix next;
    double next_gain = gain;
    for (int halving = 0; halving < 50; ++halving, eta *= 0.5) {
      next = rotate(eig, w, eta);
      next_gain = expected_gain(next, family);
      if (next_gain >= gain + 1e-4 * eta * g2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double improvement = next_gain - gain;
    m = std::move(next);
    gain = next_gain;
    eta *= 2.0;
    if (improvement < config.tolerance) {
      if (++stalled >= 5) break;
    } else {
      stalled = 0;
    }
  }
  out.gain = expected_gain(m, family);
  out.m = std::move(m);
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

nlohmann::json BoundReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["trials"] = trials;
  j["min_slack"] = std::isfinite(min_slack) ? nlohmann::json(min_slack) : nlohmann::json(nullptr);
  j["violations"] = violations;
  j["gated"] = gated;
  j["passed"] = passed();
  j["parameters"] = parameters;
  j["details"] = details;
  return j;
}

// ---------------------------------------------------------------------------
// Uncertainty relations

BoundReport verify_uncertainty_relation(Index dim, std::size_t trials, SeededRng& rng) {
  if (dim < 2) throw Error("verify_uncertainty_relation: dim must be at least 2");
  const SeededRng base = fork(rng);
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<double> slack(chunks, kInf);
  std::vector<std::size_t> bad(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    SeededRng local = base.derive(c);
    const std::size_t end = std::min(trials, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      const ComplexMatrix a = haar_unitary(dim, local);
      const ComplexMatrix b = haar_unitary(dim, local);
      const ComplexVector u = random_unit_vector(dim, local);
      const double lhs = h2_unchecked(a * u) + h2_unchecked(b * u);
      const double rhs = -2.0 * std::log2(linf_overlap(a, b.adjoint()));
      const double s = lhs - rhs;
      slack[c] = std::min(slack[c], s);
      if (s < -1e-9) ++bad[c];
    }
  });

  BoundReport report;
  report.suite = "entropic";
  report.trials = trials;
  report.min_slack = *std::min_element(slack.begin(), slack.end());
  for (std::size_t b : bad) report.violations += b;

  // A = I against a Hadamard B: the right-hand side is exactly log dim.
  const ComplexMatrix w = hadamard_matrix(dim);
  const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
  const double rhs = -2.0 * std::log2(linf_overlap(id, w.adjoint()));
  const double log_dim = std::log2(static_cast<double>(dim));
  double hadamard_slack = kInf;
  SeededRng local = base.derive(chunks);
  const std::size_t hadamard_trials = std::min<std::size_t>(trials, 1000);
  for (std::size_t t = 0; t < hadamard_trials; ++t) {
    const ComplexVector u = t < static_cast<std::size_t>(dim) ? ComplexVector(ComplexVector::Unit(dim, static_cast<Index>(t)))
                                                              : random_unit_vector(dim, local);
    const double s = h2_unchecked(u) + h2_unchecked(w * u) - rhs;
    hadamard_slack = std::min(hadamard_slack, s);
    if (s < -1e-9) ++report.violations;
  }
  if (std::abs(rhs - log_dim) > 1e-9) ++report.violations;
  report.min_slack = std::min(report.min_slack, hadamard_slack);
  report.parameters = {{"dim", dim}, {"seed", rng.seed()}, {"overlap", "max |(A B^dag)_jk|"}};
  report.details = {{"hadamard_rhs", rhs}, {"log_dim", log_dim}, {"hadamard_min_slack", hadamard_slack}};
  return report;
}

BoundReport explore_entropy_sums(const std::vector<ComplexMatrix>& encoders, std::size_t trials, SeededRng& rng) {
  const int k = static_cast<int>(encoders.size());
  if (k < 2) throw Error("explore_entropy_sums: need k >= 2");
  const Index n = encoders.front().rows();
  for (const ComplexMatrix& c : encoders) {
    if (c.rows() != n || c.cols() != n) throw Error("explore_entropy_sums: encoders must share one dimension");
  }
  double pair_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int l = i + 1; l < k; ++l) pair_sum += -2.0 * std::log2(linf_overlap(encoders[i], encoders[l].adjoint()));
  }
  const double proven = pair_sum / (k - 1);
  const double log_n = std::log2(static_cast<double>(n));
  const double target = (k - 1) * log_n;

  const SeededRng base = fork(rng);
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<double> min_sum(chunks, kInf);
  std::vector<std::size_t> bad(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    SeededRng local = base.derive(c);
    const std::size_t end = std::min(trials, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      const ComplexVector u = random_unit_vector(n, local);
      double sum = 0.0;
      for (const ComplexMatrix& e : encoders) sum += h2_unchecked(e * u);
      min_sum[c] = std::min(min_sum[c], sum);
      if (sum - proven < -1e-9) ++bad[c];
    }
  });

  BoundReport report;
  report.suite = "hk";
  report.trials = trials;
  const double observed = trials ? *std::min_element(min_sum.begin(), min_sum.end()) : kInf;
  report.min_slack = observed - proven;
  for (std::size_t b : bad) report.violations += b;
  report.parameters = {{"k", k}, {"dim", n}, {"seed", rng.seed()}};
  report.details = {{"min_entropy_sum", std::isfinite(observed) ? nlohmann::json(observed) : nlohmann::json(nullptr)},
                    {"proven_bound", proven},
                    {"half_k_log_n", 0.5 * k * log_n},
                    {"target_k_minus_1_log_n", target},
                    {"gap_to_target", std::isfinite(observed) ? nlohmann::json(observed - target) : nlohmann::json(nullptr)},
                    {"target_met_by_samples", observed >= target - 1e-9}};
  return report;
}

BoundReport verify_honest_completeness(const EncodingFamily& family) {
  const int k = family.k();
  const int m = family.m();
  const Index n = family.dim();
  BoundReport report;
  report.suite = "honest-completeness";
  report.min_slack = 0.0;
  std::vector<std::size_t> bad(static_cast<std::size_t>(k * k), 0);
  parallel_for(bad.size(), [&](std::size_t task) {
    const int j = static_cast<int>(task) / k;
    const int i = static_cast<int>(task) % k;
    const ComplexMatrix g = honest_basis(family, j).matrix() * family.encoder(i);
    for (Index d = 0; d < n; ++d) {
      const std::uint64_t want = extract_block(static_cast<std::uint64_t>(d), k, m, j);
      for (Index o = 0; o < n; ++o) {
        if (std::norm(g(o, d)) <= 1e-12) continue;
        if (decode_item(static_cast<std::uint64_t>(o), i, j, k, m) != want) ++bad[task];
      }
    }
  });
  for (std::size_t b : bad) report.violations += b;
  report.trials = static_cast<std::size_t>(n) * static_cast<std::size_t>(k * k);
  if (report.violations) report.min_slack = -1.0;
  report.parameters = {{"k", k}, {"m", m}, {"family", std::string(to_string(family.kind()))}};
  return report;
}

BoundReport verify_honest_privacy(int max_m) {
  if (max_m < 1) throw Error("verify_honest_privacy: max_m must be at least 1");
  BoundReport report;
  report.suite = "honest-privacy";
  report.min_slack = kInf;
  nlohmann::json rows = nlohmann::json::array();
  for (int m = 1; m <= max_m; ++m) {
    for (int k = 2; k <= (1 << m) + 1; ++k) {
      const ItemBasisFamily family = mub_family(k, m);
      double worst = 0.0;
      for (int j = 0; j < k; ++j) {
        double total = 0.0;
        for (double x : honest_leakage_per_item(family, j)) total += x;
        worst = std::max(worst, total);
      }
      ++report.trials;
      report.min_slack = std::min(report.min_slack, -worst);
      if (worst > 1e-9) ++report.violations;
      rows.push_back({{"k", k}, {"m", m}, {"leakage_bits", worst}});
    }
  }
  report.parameters = {{"max_m", max_m}};
  report.details = {{"rows", rows}};
  return report;
}

double leakage_upper_bound(const EncodingFamily& family) {
  // L∞(E_i† E_l) is the product of the item-level overlaps because the
  // permutations P_i only reorder rows and columns.
  const int k = family.k();
  const ItemBasisFamily& basis = family.basis();
  const double log_n = std::log2(static_cast<double>(family.dim()));
  if (basis.pairwise_hadamard()) return 0.5 * log_n;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int l = i + 1; l < k; ++l) {
      for (int t = 0; t < k; ++t) sum += std::log2(linf_overlap(basis[(i + t) % k].adjoint(), basis[(l + t) % k]));
    }
  }
  return std::clamp(log_n + 2.0 * sum / (k * (k - 1)), 0.0, log_n);
}

BoundReport verify_gain_bound(const EncodingFamily& family, std::size_t bases, std::size_t povms, SeededRng& rng) {
  const Index n = family.dim();
  const double bound = leakage_upper_bound(family);
  const double log_n = std::log2(static_cast<double>(n));
  const SeededRng base = fork(rng);
  const std::size_t total = bases + povms;
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<double> slack(chunks, kInf);
  std::vector<double> best(chunks, -kInf);
  std::vector<std::size_t> bad(chunks, 0);
  std::vector<std::size_t> entropic_bad(chunks, 0);
  const bool hadamard_pair = family.k() == 2 && family.basis().pairwise_hadamard();
  parallel_for(chunks, [&](std::size_t c) {
    SeededRng local = base.derive(c);
    const std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      InfoAccount acc;
      if (t < bases) {
        const MeasurementBasis basis(haar_unitary(n, local));
        acc = info_account(basis, family, ProbabilityDistribution::uniform(static_cast<std::size_t>(n)));
      } else {
        const std::size_t outcomes = 1 + local.below(2 * static_cast<std::uint64_t>(n));
        const Povm p = random_povm(n, outcomes, n, local);
        acc = povm_info_account(p, family);
        if (hadamard_pair && povm_entropy_bound_check(p, family).violations > 0) ++entropic_bad[c];
      }
      // The bound holds outcome by outcome, so the worst outcome is gated.
      const double top = std::max(acc.gain_worst, acc.gain_expected);
      slack[c] = std::min(slack[c], bound - top);
      best[c] = std::max(best[c], top);
      if (top > bound + 1e-9) ++bad[c];
    }
  });
  BoundReport report;
  report.suite = "gain";
  report.trials = total;
  report.min_slack = total ? *std::min_element(slack.begin(), slack.end()) : kInf;
  std::size_t entropic = 0;
  for (std::size_t b : bad) report.violations += b;
  for (std::size_t b : entropic_bad) entropic += b;
  report.violations += entropic;
  report.parameters = {{"k", family.k()}, {"m", family.m()}, {"family", std::string(to_string(family.kind()))},
                       {"bases", bases}, {"povms", povms}, {"seed", rng.seed()}};
  report.details = {{"bound_bits", bound},
                    {"log_n", log_n},
                    {"largest_gain_seen", total ? *std::max_element(best.begin(), best.end()) : 0.0},
                    {"povm_entropy_sum_violations", entropic}};
  return report;
}

// ---------------------------------------------------------------------------
// Leakage optimizer

ComplexMatrix hermitian_from_parameters(const std::vector<double>& theta, Index n) {
  if (static_cast<Index>(theta.size()) != n * n) throw Error("hermitian_from_parameters: need n^2 parameters");
  ComplexMatrix h(n, n);
  std::size_t p = 0;
  for (Index d = 0; d < n; ++d) h(d, d) = theta[p++];
  for (Index r = 0; r < n; ++r) {
    for (Index c = r + 1; c < n; ++c) {
      h(r, c) = Complex(theta[p], theta[p + 1]);
      h(c, r) = std::conj(h(r, c));
      p += 2;
    }
  }
  return h;
}

std::vector<double> parameters_from_hermitian(const ComplexMatrix& h) {
  const Index n = h.rows();
  std::vector<double> theta;
  theta.reserve(static_cast<std::size_t>(n * n));
  for (Index d = 0; d < n; ++d) theta.push_back(h(d, d).real());
  for (Index r = 0; r < n; ++r) {
    for (Index c = r + 1; c < n; ++c) {
      const Complex z = 0.5 * (h(r, c) + std::conj(h(c, r)));
      theta.push_back(z.real());
      theta.push_back(z.imag());
    }
  }
  return theta;
}

ComplexMatrix unitary_from_parameters(const std::vector<double>& theta, Index n) {
  return exp_i_hermitian(hermitian_from_parameters(theta, n));
}

double expected_gain_with_gradient(const ComplexMatrix& m, const EncodingFamily& family, ComplexMatrix* gradient) {
  const Index n = family.dim();
  const int k = family.k();
  if (m.rows() != n || m.cols() != n) throw Error("expected_gain: dimension mismatch");
  double entropy = 0.0;
  ComplexMatrix q;
  if (gradient) q = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < k; ++i) {
    const ComplexMatrix v = m * family.encoder(i);
    Eigen::MatrixXd logp(n, n);
    for (Index d = 0; d < n; ++d) {
      for (Index j = 0; j < n; ++j) {
        const double p = std::norm(v(j, d));
        const double lp = p > 1e-300 ? std::log2(p) : 0.0;
        logp(j, d) = lp;
        entropy -= p * lp;
      }
    }
    // d gain along exp(itX) M is (2/(nk)) Re Σ_jl i X_jl Q_jl with
    // Q = (log p ∘ conj V) Vᵀ.
    if (gradient) q.noalias() += (logp.cast<Complex>().cwiseProduct(v.conjugate())) * v.transpose();
  }
  const double scale = 1.0 / (static_cast<double>(n) * k);
  if (gradient) {
    const ComplexMatrix z = Complex(0.0, 1.0) * q.transpose();
    *gradient = scale * (z + z.adjoint());
  }
  return std::log2(static_cast<double>(n)) - entropy * scale;
}

nlohmann::json LeakageResult::to_json() const {
  return {{"k", k},
          {"m", m},
          {"family", std::string(to_string(kind))},
          {"best_gain_bits", best_gain},
          {"bound_bits", bound},
          {"within_bound", best_gain <= bound + 1e-6},
          {"note", "lower bound on the supremum"},
          {"restarts", config.restarts},
          {"iterations", config.iterations},
          {"tolerance", config.tolerance},
          {"seed", seed},
          {"best_restart", best_restart},
          {"reproduction_error", reproduction_error},
          {"parameters", parameters}};
}

LeakageResult max_leakage(const EncodingFamily& family, const OptimizerConfig& config, SeededRng& rng) {
  if (family.dim() > kMaxDimension) throw Error("max_leakage: dimension exceeds 4096");
  if (config.restarts < 1 || config.iterations < 0) throw Error("max_leakage: invalid optimizer config");
  const Index n = family.dim();
  LeakageResult result;
  result.k = family.k();
  result.m = family.m();
  result.kind = family.kind();
  result.bound = leakage_upper_bound(family);
  result.config = config;
  result.seed = rng.seed();

  const SeededRng base = fork(rng);
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  // Restart 0 starts from the honest measurement, so the result is never
  // below what an honest user already gets; the rest start Haar-random.
  parallel_for(outcomes.size(),
               [&](std::size_t r) { outcomes[r] = run_restart(family, config, base.derive(r), r == 0); });
  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (outcomes[r].gain > outcomes[best].gain) best = r;
  }
  result.best_restart = static_cast<int>(best);

  // M is unitary hence normal, so its Schur form is diagonal and the
  // principal logarithm is U diag(arg λ) U†.
  Eigen::ComplexSchur<ComplexMatrix> schur(outcomes[best].m);
  const ComplexMatrix& u = schur.matrixU();
  Eigen::VectorXd phases(n);
  for (Index d = 0; d < n; ++d) phases(d) = std::arg(schur.matrixT()(d, d));
  const ComplexMatrix h = u * phases.cast<Complex>().asDiagonal() * u.adjoint();
  result.parameters = parameters_from_hermitian(h);
  result.best_gain = expected_gain(unitary_from_parameters(result.parameters, n), family);
  result.reproduction_error = std::abs(result.best_gain - outcomes[best].gain);
  return result;
}

// ---------------------------------------------------------------------------
// Scan

OptimizerConfig scan_cell_config(const OptimizerConfig& config, int k, int m) {
  // Work per optimizer step grows as k n^3, so cells above dimension 16
  // get fewer restarts and iterations.
  OptimizerConfig out = config;
  const double n = std::ldexp(1.0, k * m);
  if (n <= 16) return out;
  const double ratio = 16.0 / n;
  out.restarts = std::min(config.restarts, std::max(2, static_cast<int>(std::lround(config.restarts * ratio))));
  out.iterations =
      std::min(config.iterations, std::max(60, static_cast<int>(std::lround(config.iterations * ratio * ratio))));
  return out;
}

ScanResult leakage_scan(int k_lo, int k_hi, int m_lo, int m_hi, const OptimizerConfig& config, SeededRng& rng) {
  if (k_lo < 2 || k_hi < k_lo || m_lo < 1 || m_hi < m_lo) throw Error("leakage_scan: invalid grid");
  if (k_hi * m_hi > 12) throw Error("leakage_scan: grid exceeds km <= 12");
  ScanResult scan;
  scan.seed = rng.seed();
  struct Cell {
    int k;
    int m;
  };
  std::vector<Cell> grid;
  for (int k = k_lo; k <= k_hi; ++k) {
    for (int m = m_lo; m <= m_hi; ++m) grid.push_back({k, m});
  }
  const SeededRng base = fork(rng);
  scan.cells.resize(grid.size());
  // Cells run one after another; max_leakage parallelizes over restarts.
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto [k, m] = grid[c];
    SeededRng cell_rng = base.derive(c);
    const bool has_mub = k <= (1 << m) + 1;
    SeededRng family_rng = cell_rng.derive(0xFA);
    const EncodingFamily family = build_family(has_mub ? mub_family(k, m) : random_family(k, m, family_rng));
    SeededRng opt_rng = cell_rng.derive(0x0F);
    scan.cells[c].result = max_leakage(family, scan_cell_config(config, k, m), opt_rng);
    scan.cells[c].result.seed = scan.seed;
  }

  // Least squares on log2(gain / m) = log2 c + α log2 k.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const ScanCell& cell : scan.cells) {
    if (cell.result.best_gain <= 1e-9) continue;
    const double x = std::log2(cell.result.k);
    const double y = std::log2(cell.result.best_gain / cell.result.m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  if (count >= 2 && std::abs(denom) > 1e-12) {
    const double alpha = (count * sxy - sx * sy) / denom;
    const double log_c = (sy - alpha * sx) / count;
    scan.fit_alpha = alpha;
    scan.fit_c = std::exp2(log_c);
    for (ScanCell& cell : scan.cells) {
      if (cell.result.best_gain <= 1e-9) continue;
      cell.residual = std::log2(cell.result.best_gain / cell.result.m) - (log_c + alpha * std::log2(cell.result.k));
    }
  }
  return scan;
}

std::string ScanResult::to_csv() const {
  std::ostringstream out;
  out << "k,m,family,best_gain_bits,bound_bits,restarts,iters,seed\n";
  for (const ScanCell& cell : cells) {
    const LeakageResult& r = cell.result;
    out << r.k << ',' << r.m << ',' << to_string(r.kind) << ',' << format_double(r.best_gain) << ','
        << format_double(r.bound) << ',' << r.config.restarts << ',' << r.config.iterations << ',' << seed << '\n';
  }
  out << "# fit c=" << (fit_c ? format_double(*fit_c) : "nan") << " alpha="
      << (fit_alpha ? format_double(*fit_alpha) : "nan") << " reference c=0.4 alpha=0.7\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Concentration

std::vector<double> concentration_t_grid(int ell) {
  if (ell < 1) throw Error("concentration_t_grid: ell must be positive");
  std::vector<double> grid;
  for (double c : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0}) grid.push_back(c / std::sqrt(static_cast<double>(ell)));
  return grid;
}

BoundReport concentration_experiment(int ell, std::size_t trials, const std::vector<double>& t_grid, SeededRng& rng) {
  if (ell < 2) throw Error("concentration_experiment: ell must be at least 2");
  if (trials == 0) throw Error("concentration_experiment: need at least one pair");
  const SeededRng base = fork(rng);
  std::vector<double> overlaps(trials);
  parallel_for(trials, [&](std::size_t t) {
    SeededRng local = base.derive(t);
    const ComplexMatrix a = haar_unitary(ell, local);
    const ComplexMatrix b = haar_unitary(ell, local);
    overlaps[t] = linf_overlap(a.adjoint(), b);
  });

  BoundReport report;
  report.suite = "concentration";
  report.trials = trials;
  report.min_slack = kInf;
  nlohmann::json rows = nlohmann::json::array();
  const double l = static_cast<double>(ell);
  for (double t : t_grid) {
    const auto hits = std::count_if(overlaps.begin(), overlaps.end(), [t](double c) { return c >= t; });
    const double freq = static_cast<double>(hits) / static_cast<double>(trials);
    const double bound = std::min(1.0, 4.0 * l * l * std::exp(-t * t * l / 2.0));
    const double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(trials));
    const double slack = bound + 3.0 * sigma - freq;
    const bool violated = slack < 0.0;
    if (violated) ++report.violations;
    report.min_slack = std::min(report.min_slack, slack);
    rows.push_back({{"t", t}, {"frequency", freq}, {"bound", bound}, {"sigma", sigma}, {"violated", violated}});
  }
  report.parameters = {{"ell", ell}, {"pairs", trials}, {"seed", rng.seed()}};
  report.details = {{"rows", rows},
                    {"max_overlap_seen", *std::max_element(overlaps.begin(), overlaps.end())},
                    {"min_overlap_seen", *std::min_element(overlaps.begin(), overlaps.end())}};
  return report;
}

// ---------------------------------------------------------------------------
// Honest leakage of random families

nlohmann::json TrendResult::to_json() const {
  nlohmann::json out;
  nlohmann::json table = nlohmann::json::array();
  for (const TrendRow& r : rows) {
    table.push_back({{"k", r.k},
                     {"m", r.m},
                     {"family", std::string(to_string(r.kind))},
                     {"sample", r.sample},
                     {"max_overlap", r.max_overlap},
                     {"per_item_leakage", r.per_item_leakage},
                     {"per_item_bound", r.per_item_bound}});
  }
  out["rows"] = std::move(table);
  out["medians"] = medians;
  return out;
}

TrendResult random_family_leakage_trend(const std::vector<int>& ks, const std::vector<int>& ms, int samples,
                                        SeededRng& rng) {
  if (samples < 1) throw Error("random_family_leakage_trend: need at least one sample");
  TrendResult result;
  const SeededRng base = fork(rng);
  auto measure = [](const ItemBasisFamily& family, int sample) {
    TrendRow row;
    row.k = family.k();
    row.m = family.m();
    row.kind = family.kind();
    row.sample = sample;
    row.max_overlap = family.max_pairwise_overlap();
    const std::vector<double> leak = honest_leakage_per_item(family, 0);
    double total = 0.0;
    for (double x : leak) total += x;
    row.per_item_leakage = total / (family.k() - 1);
    row.per_item_bound = std::clamp(family.m() + std::log2(row.max_overlap * row.max_overlap), 0.0,
                                    static_cast<double>(family.m()));
    return row;
  };
  std::uint64_t cell = 0;
  for (int k : ks) {
    for (int m : ms) {
      if (k < 2 || m < 1 || m > 12) throw Error("random_family_leakage_trend: cell outside k >= 2, 1 <= m <= 12");
      if (k <= (1 << m) + 1) result.rows.push_back(measure(mub_family(k, m), -1));
      std::vector<double> values;
      for (int s = 0; s < samples; ++s) {
        SeededRng local = base.derive((cell << 20) | static_cast<std::uint64_t>(s));
        result.rows.push_back(measure(random_family(k, m, local), s));
        values.push_back(result.rows.back().per_item_leakage);
      }
      const double med = median(values);
      result.medians.push_back({{"k", k}, {"m", m}, {"median_per_item_leakage", med},
                                {"median_fraction_of_m", med / m}});
      ++cell;
    }
  }
  return result;
}

}  // namespace obliq
