#include "obliq/povm.hpp"

#include <algorithm>
#include <cmath>

namespace obliq {

namespace {

constexpr double kDegenerate = 1e-15;

ComplexMatrix gaussian_matrix(Index rows, Index cols, SeededRng& rng) {
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  }
  return g;
}

std::vector<double> diagonal(const ComplexMatrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Index d = 0; d < m.rows(); ++d) out[static_cast<std::size_t>(d)] = m(d, d).real();
  return out;
}

void require_two_encoding_hadamard(const EncodingFamily& family, const char* what) {
  if (family.k() != 2) throw Error(std::string(what) + ": needs a two-encoding family");
  if (!is_hadamard(family.encoder(0).adjoint() * family.encoder(1))) {
    throw Error(std::string(what) + ": E_0^dag E_1 is not Hadamard");
  }
}

}  // namespace

Povm::Povm(std::vector<ComplexMatrix> ops, std::vector<ComplexMatrix> effects)
    : dim_(ops.front().rows()), ops_(std::move(ops)), effects_(std::move(effects)) {}

Povm validate_povm(std::vector<ComplexMatrix> operators, double tol) {
  if (operators.empty()) throw Error("povm: no operators");
  const Index n = operators.front().rows();
  ComplexMatrix total = ComplexMatrix::Zero(n, n);
  std::vector<ComplexMatrix> effects;
  effects.reserve(operators.size());
  for (const ComplexMatrix& r : operators) {
    if (r.rows() != n || r.cols() != n) throw Error("povm: operators must all be n x n");
    if (!r.allFinite()) throw Error("povm: non-finite operator entry");
    ComplexMatrix e = r.adjoint() * r;
    const ComplexMatrix hermitian = 0.5 * (e + e.adjoint());
    const double min_eig = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(hermitian, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    if (min_eig < -tol) throw Error("povm: negative operator (eigenvalue " + std::to_string(min_eig) + ")");
    total += e;
    effects.push_back(std::move(e));
  }
  const double err = (total - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (err > tol) throw Error("povm: completeness violated (max deviation " + std::to_string(err) + ")");
  return Povm(std::move(operators), std::move(effects));
}

Povm povm_from_basis(const MeasurementBasis& basis) {
  std::vector<ComplexMatrix> ops;
  const ComplexMatrix& m = basis.matrix();
  for (Index j = 0; j < m.rows(); ++j) {
    const ComplexVector b = m.row(j).adjoint();
    ops.push_back(b * b.adjoint());
  }
  return validate_povm(std::move(ops));
}

ProbabilityDistribution povm_outcome_distribution(const QuantumState& state, const Povm& p) {
  if (state.dim() != p.dim()) throw Error("povm: state dimension mismatch");
  std::vector<double> probs(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) probs[j] = (p[j] * state.amplitudes()).squaredNorm();
  return ProbabilityDistribution(std::move(probs));
}

PovmOutcome measure_povm(const QuantumState& state, const Povm& p, SeededRng& rng) {
  const ProbabilityDistribution probs = povm_outcome_distribution(state, p);
  const Index j = sample_index(probs, rng);
  const ComplexVector post = p[static_cast<std::size_t>(j)] * state.amplitudes();
  return {j, QuantumState(post / post.norm())};
}

double povm_normalizer(const Povm& p, Index j) { return p.effect(static_cast<std::size_t>(j)).trace().real(); }

ProbabilityDistribution povm_posterior(const Povm& p, const EncodingFamily& family, int i, Index j) {
  if (p.dim() != family.dim()) throw Error("povm_posterior: dimension mismatch");
  if (j < 0 || static_cast<std::size_t>(j) >= p.size()) throw Error("povm_posterior: outcome out of range");
  const double s2 = povm_normalizer(p, j);
  if (s2 < kDegenerate) throw Error("povm_posterior: degenerate operator (s^2 ~ 0)");
  const ComplexMatrix& e = family.encoder(i);
  const ComplexMatrix conditioned = e.adjoint() * p.effect(static_cast<std::size_t>(j)) * e;
  const double s2_encoded = conditioned.trace().real();
  if (std::abs(s2_encoded - s2) > 1e-12 * std::max(1.0, s2)) {
    throw Error("povm_posterior: normalizer depends on the encoding; encoder not unitary");
  }
  std::vector<double> post = diagonal(conditioned);
  for (double& x : post) x /= s2;
  return ProbabilityDistribution(std::move(post));
}

InfoAccount povm_info_account(const Povm& p, const EncodingFamily& family) {
  if (p.dim() != family.dim()) throw Error("povm_info_account: dimension mismatch");
  const double n = static_cast<double>(family.dim());
  const double log_n = std::log2(n);
  InfoAccount acc;
  acc.gain_worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double weight = povm_normalizer(p, static_cast<Index>(j)) / n;
    std::vector<double> h(static_cast<std::size_t>(family.k()), 0.0);
    double h_avg = log_n;
    if (weight * n >= kDegenerate) {
      double sum = 0.0;
      for (int i = 0; i < family.k(); ++i) {
        h[static_cast<std::size_t>(i)] = shannon_entropy(povm_posterior(p, family, i, static_cast<Index>(j)));
        sum += h[static_cast<std::size_t>(i)];
      }
      h_avg = sum / family.k();
      acc.gain_worst = std::max(acc.gain_worst, log_n - h_avg);
    }
    acc.h_cond.push_back(std::move(h));
    acc.h_avg.push_back(h_avg);
    acc.gain.push_back(log_n - h_avg);
    acc.gain_expected += weight * (log_n - h_avg);
  }
  return acc;
}

EigenMixture povm_eigen_mixture(const Povm& p, const EncodingFamily& family, Index j) {
  if (family.k() != 2) throw Error("povm_eigen_mixture: needs a two-encoding family");
  const double s2 = povm_normalizer(p, j);
  if (s2 < kDegenerate) throw Error("povm_eigen_mixture: degenerate operator");
  const ComplexMatrix a = p[static_cast<std::size_t>(j)] / std::sqrt(s2) * family.encoder(0);
  const ComplexMatrix u = family.encoder(0).adjoint() * family.encoder(1);
  const ComplexMatrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (gram + gram.adjoint()));
  EigenMixture out;
  for (Index r = 0; r < gram.rows(); ++r) {
    const ComplexVector v = eig.eigenvectors().col(r);
    const ComplexVector w = u.adjoint() * v;
    std::vector<double> pr(static_cast<std::size_t>(v.size())), qr(static_cast<std::size_t>(v.size()));
    for (Index d = 0; d < v.size(); ++d) {
      pr[static_cast<std::size_t>(d)] = std::norm(v(d));
      qr[static_cast<std::size_t>(d)] = std::norm(w(d));
    }
    out.weights.push_back(std::max(0.0, eig.eigenvalues()(r)));
    out.p.push_back(std::move(pr));
    out.q.push_back(std::move(qr));
  }
  return out;
}

EntropyBoundReport povm_entropy_bound_check(const Povm& p, const EncodingFamily& family) {
  require_two_encoding_hadamard(family, "povm_entropy_bound_check");
  EntropyBoundReport report;
  report.bound = std::log2(static_cast<double>(family.dim()));
  report.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (povm_normalizer(p, static_cast<Index>(j)) < kDegenerate) continue;
    const double sum = shannon_entropy(povm_posterior(p, family, 0, static_cast<Index>(j))) +
                       shannon_entropy(povm_posterior(p, family, 1, static_cast<Index>(j)));
    const double slack = sum - report.bound;
    report.entropy_sums.push_back(sum);
    report.min_slack = std::min(report.min_slack, slack);
    if (slack < -1e-9) ++report.violations;
    ++report.outcomes;
  }
  return report;
}

Povm random_povm(Index dim, std::size_t outcomes, Index max_rank, SeededRng& rng) {
  if (dim < 1 || outcomes < 1) throw Error("random_povm: need dim >= 1 and at least one outcome");
  max_rank = std::clamp<Index>(max_rank, 1, dim);
  std::vector<ComplexMatrix> g;
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  std::vector<Index> ranks(outcomes);
  Index covered = 0;
  for (Index& r : ranks) {
    r = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_rank)));
    covered += r;
  }
  // Total rank below dim would make Σ G†G singular.
  for (std::size_t j = 0; covered < dim; j = (j + 1) % outcomes) {
    if (ranks[j] < dim) {
      ++ranks[j];
      ++covered;
    }
  }
  for (std::size_t j = 0; j < outcomes; ++j) {
    const Index rank = ranks[j];
    ComplexMatrix op = gaussian_matrix(dim, rank, rng) * gaussian_matrix(dim, rank, rng).adjoint();
    total += op.adjoint() * op;
    g.push_back(std::move(op));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (total + total.adjoint()));
  if (eig.eigenvalues().minCoeff() <= 1e-12) throw Error("random_povm: operators do not span the space");
  const ComplexMatrix inv_sqrt =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
  for (ComplexMatrix& op : g) op = op * inv_sqrt;
  return validate_povm(std::move(g));
}

}  // namespace obliq
