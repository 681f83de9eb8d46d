#pragma once

// Encoding families for k items of m bits.
//
// An ItemBasisFamily holds k unitary 2^m × 2^m matrices A_0…A_{k−1}. The
// EncodingFamily built from it uses, for encoding i,
//
//   C_i = A_i ⊗ A_{i+1} ⊗ … ⊗ A_{k−1} ⊗ A_0 ⊗ … ⊗ A_{i−1}
//   E_i = C_i · P_i,   P_i = rotation_permutation(k, m, i)
//
// so the transmitted state for configuration d is column d of E_i.
//
// Both classes certify their invariants in the constructor; an instance that
// exists has passed certification.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "obliq/qmath.hpp"

namespace obliq {

enum class FamilyKind { walsh, mub, cyclic, random, tensorized, explicit_matrices };

std::string_view to_string(FamilyKind kind);
FamilyKind family_kind_from_string(std::string_view name);

struct FamilyProvenance {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stream;
  std::optional<int> factor_dim;  // r, for tensorized families
};

class ItemBasisFamily {
 public:
  /// Certifies unitarity plus the kind-specific invariants; throws Error.
  ItemBasisFamily(FamilyKind kind, int k, int m, std::vector<ComplexMatrix> matrices,
                  FamilyProvenance provenance = {});

  FamilyKind kind() const { return kind_; }
  int k() const { return k_; }
  int m() const { return m_; }
  Index item_dim() const { return Index{1} << m_; }
  const ComplexMatrix& operator[](int i) const { return matrices_.at(static_cast<std::size_t>(i)); }
  const std::vector<ComplexMatrix>& matrices() const { return matrices_; }
  const FamilyProvenance& provenance() const { return provenance_; }

  /// max over i ≠ j of L∞(A_i† A_j).
  double max_pairwise_overlap() const { return max_overlap_; }
  /// Every A_i† A_j (i ≠ j) is Hadamard within kUnitaryTol.
  bool pairwise_hadamard() const { return pairwise_hadamard_; }

 private:
  FamilyKind kind_;
  int k_;
  int m_;
  std::vector<ComplexMatrix> matrices_;
  FamilyProvenance provenance_;
  double max_overlap_ = 0.0;
  bool pairwise_hadamard_ = false;
};

class EncodingFamily {
 public:
  explicit EncodingFamily(ItemBasisFamily basis);

  int k() const { return basis_.k(); }
  int m() const { return basis_.m(); }
  Index dim() const { return Index{1} << (k() * m()); }
  FamilyKind kind() const { return basis_.kind(); }
  const ItemBasisFamily& basis() const { return basis_; }

  const ComplexMatrix& encoder(int i) const;
  /// C_i, recomputed on demand.
  ComplexMatrix cyclic_tensor(int i) const;
  /// P_i, recomputed on demand.
  ComplexMatrix permutation(int i) const;

  /// {kind, k, m, seed?, stream?, r?, matrices?}; item-basis matrices are
  /// embedded for explicit, random and tensorized families.
  nlohmann::json descriptor() const;

 private:
  ItemBasisFamily basis_;
  std::vector<ComplexMatrix> encoders_;
};

EncodingFamily build_family(ItemBasisFamily basis);

/// W_{2^m} = W_2^{⊗m} with W_2 = [[1, 1], [−1, 1]]/√2.
ComplexMatrix walsh_matrix(int m);

/// The two 4×4 single-bit encoders written out entry by entry.
EncodingFamily explicit_single_bit_family();
EncodingFamily walsh_family(int m);

ItemBasisFamily mub_family(int k, int m);
ItemBasisFamily cyclic_family(int k, int m);
ItemBasisFamily random_family(int k, int m, SeededRng& rng);
ItemBasisFamily tensorized_family(int k, int m, int r, SeededRng& rng);

/// Rebuilds a family from descriptor(); random and tensorized families are
/// restored from their embedded matrices.
EncodingFamily family_from_descriptor(const nlohmann::json& descriptor);

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace obliq
