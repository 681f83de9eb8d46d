#pragma once

// Generalized measurements {R_j} with Σ_j R_j†R_j = I.

#include <vector>

#include "obliq/encodings.hpp"
#include "obliq/protocol.hpp"
#include "obliq/qmath.hpp"

namespace obliq {

class Povm {
 public:
  Index dim() const { return dim_; }
  std::size_t size() const { return ops_.size(); }
  const ComplexMatrix& operator[](std::size_t j) const { return ops_.at(j); }
  const std::vector<ComplexMatrix>& operators() const { return ops_; }
  /// R_j† R_j
  const ComplexMatrix& effect(std::size_t j) const { return effects_.at(j); }

 private:
  friend Povm validate_povm(std::vector<ComplexMatrix> operators, double tol);
  Povm(std::vector<ComplexMatrix> ops, std::vector<ComplexMatrix> effects);

  Index dim_;
  std::vector<ComplexMatrix> ops_;
  std::vector<ComplexMatrix> effects_;
};

/// Certifies completeness (max-entry error ≤ tol) and that every effect has
/// smallest eigenvalue ≥ −tol; throws Error otherwise.
Povm validate_povm(std::vector<ComplexMatrix> operators, double tol = kUnitaryTol);

/// R_j = b_j b_j† where ⟨b_j| is row j of the basis matrix.
Povm povm_from_basis(const MeasurementBasis& basis);

ProbabilityDistribution povm_outcome_distribution(const QuantumState& state, const Povm& p);

struct PovmOutcome {
  Index outcome;
  QuantumState post_state;
};
PovmOutcome measure_povm(const QuantumState& state, const Povm& p, SeededRng& rng);

/// s² = Tr(R_j† R_j): the total likelihood of outcome j over all
/// configurations, independent of the encoding.
double povm_normalizer(const Povm& p, Index j);

/// Uniform prior: P(d | j, i) = (E_i† S† S E_i)_dd with S = R_j / s.
ProbabilityDistribution povm_posterior(const Povm& p, const EncodingFamily& family, int i, Index j);

/// Gain accounting with outcome weights P(j) = s_j² / n.
InfoAccount povm_info_account(const Povm& p, const EncodingFamily& family);

/// Spectral split of an outcome's posterior into rank-one pieces for a
/// two-encoding family: with A = S E_0 and A†A = Σ_r λ_r v_r v_r†,
/// p^(r) = |v_r|^2 and q^(r) = |U† v_r|^2 for U = E_0† E_1.
struct EigenMixture {
  std::vector<double> weights;
  std::vector<std::vector<double>> p;
  std::vector<std::vector<double>> q;
};
EigenMixture povm_eigen_mixture(const Povm& p, const EncodingFamily& family, Index j);

struct EntropyBoundReport {
  std::size_t outcomes = 0;
  double bound = 0.0;                      // log n
  double min_slack = 0.0;                  // min_j (H_j0 + H_j1 − log n)
  std::size_t violations = 0;              // slack < −1e-9
  std::vector<double> entropy_sums;        // per outcome
};

/// For a two-encoding family with E_0†E_1 Hadamard, checks
/// H(P(·|j,0)) + H(P(·|j,1)) ≥ log n for every outcome.
EntropyBoundReport povm_entropy_bound_check(const Povm& p, const EncodingFamily& family);

/// N operators G_j = X_j Y_j† of random rank ≤ max_rank, right-normalized by
/// (Σ G†G)^(−1/2).
Povm random_povm(Index dim, std::size_t outcomes, Index max_rank, SeededRng& rng);

}  // namespace obliq
