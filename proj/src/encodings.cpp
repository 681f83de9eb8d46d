#include "obliq/encodings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "obliq/gf2m.hpp"

namespace obliq {

namespace {

// Full n^3 unitarity checks on encoders stop here; above it the factors are
// certified and the tensor/permutation structure carries unitarity.
constexpr Index kEncoderCheckLimit = 256;

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix alpha1() {
  const double s = 1.0 / std::numbers::sqrt2;
  ComplexMatrix a(2, 2);
  a << s, s, s, -s;
  return a;
}

ComplexMatrix alpha2() {
  const double s = 1.0 / std::numbers::sqrt2;
  const Complex i(0.0, 1.0);
  ComplexMatrix a(2, 2);
  a << s, s, -i * s, i * s;
  return a;
}

// Diagonal i^{q_a(x)} with q_a(x) = x^T S_a x evaluated over Z_4, where
// S_a[u][v] = Tr(a·X^(u+v)). S_a is symmetric and nonsingular for a ≠ 0 and
// S_a ⊕ S_b = S_{a⊕b}, which makes (D_a W)†(D_b W) Hadamard for a ≠ b.
ComplexMatrix quadratic_phase(gf::Element a, int m) {
  std::vector<std::vector<int>> s(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m)));
  const auto generator = static_cast<gf::Element>(gf::poly_mod(0b10, gf::modulus(m)));
  for (int u = 0; u < m; ++u) {
    for (int v = 0; v < m; ++v) {
      s[u][v] = gf::trace(gf::mul(a, gf::pow(generator, static_cast<std::uint64_t>(u + v), m), m), m);
    }
  }
  const Index l = Index{1} << m;
  static const Complex kPowersOfI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  ComplexMatrix d = ComplexMatrix::Zero(l, l);
  for (Index x = 0; x < l; ++x) {
    int q = 0;
    for (int u = 0; u < m; ++u) {
      if (((x >> u) & 1) == 0) continue;
      q += s[u][u];
      for (int v = u + 1; v < m; ++v) {
        if ((x >> v) & 1) q += 2 * s[u][v];
      }
    }
    d(x, x) = kPowersOfI[q % 4];
  }
  return d;
}

ComplexMatrix matrix_power(const ComplexMatrix& a, int e) {
  ComplexMatrix out = identity(a.rows());
  for (int i = 0; i < e; ++i) out = out * a;
  return out;
}

}  // namespace

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::walsh: return "walsh";
    case FamilyKind::mub: return "mub";
    case FamilyKind::cyclic: return "cyclic";
    case FamilyKind::random: return "random";
    case FamilyKind::tensorized: return "tensorized";
    case FamilyKind::explicit_matrices: return "explicit";
  }
  return "unknown";
}

FamilyKind family_kind_from_string(std::string_view name) {
  for (FamilyKind k : {FamilyKind::walsh, FamilyKind::mub, FamilyKind::cyclic, FamilyKind::random,
                       FamilyKind::tensorized, FamilyKind::explicit_matrices}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown family kind '" + std::string(name) + "'");
}

ItemBasisFamily::ItemBasisFamily(FamilyKind kind, int k, int m, std::vector<ComplexMatrix> matrices,
                                 FamilyProvenance provenance)
    : kind_(kind), k_(k), m_(m), matrices_(std::move(matrices)), provenance_(provenance) {
  if (k < 2) throw Error("family needs at least 2 items, got k = " + std::to_string(k));
  if (m < 1) throw Error("items need at least 1 bit, got m = " + std::to_string(m));
  if (m > 12) throw Error("item dimension 2^m exceeds 4096");
  if (static_cast<int>(matrices_.size()) != k) throw Error("family: expected k matrices");
  const Index l = item_dim();
  for (int i = 0; i < k; ++i) {
    const ComplexMatrix& a = matrices_[i];
    if (a.rows() != l || a.cols() != l) throw Error("family: A_" + std::to_string(i) + " has wrong size");
    if (!is_unitary(a)) throw Error("family: A_" + std::to_string(i) + " is not unitary");
  }

  pairwise_hadamard_ = true;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const ComplexMatrix overlap = matrices_[i].adjoint() * matrices_[j];
      max_overlap_ = std::max(max_overlap_, overlap.cwiseAbs().maxCoeff());
      pairwise_hadamard_ = pairwise_hadamard_ && is_hadamard(overlap);
    }
  }

  switch (kind) {
    case FamilyKind::walsh:
      if (k != 2 || !approx_equal(matrices_[0], identity(l), kUnitaryTol) ||
          !approx_equal(matrices_[1], walsh_matrix(m), kUnitaryTol)) {
        throw Error("walsh family must be {I, W_(2^m)}");
      }
      break;
    case FamilyKind::mub:
      if (!pairwise_hadamard_) throw Error("mub family failed certification: some A_i^dag A_j is not Hadamard");
      break;
    case FamilyKind::cyclic: {
      for (int i = 0; i < k; ++i) {
        if (!approx_equal(matrices_[i], matrix_power(matrices_[1], i), kUnitaryTol)) {
          throw Error("cyclic family failed certification: A_i != A^i");
        }
      }
      if (!approx_equal(matrix_power(matrices_[1], k), identity(l), kUnitaryTol)) {
        throw Error("cyclic family failed certification: A^k != I");
      }
      for (int i = 1; i < k; ++i) {
        if (!is_hadamard(matrices_[i])) throw Error("cyclic family failed certification: A^i not Hadamard");
      }
      break;
    }
    case FamilyKind::tensorized:
      if (!provenance_.factor_dim) throw Error("tensorized family requires its factor dimension");
      break;
    case FamilyKind::random:
    case FamilyKind::explicit_matrices:
      break;
  }
}

EncodingFamily::EncodingFamily(ItemBasisFamily basis) : basis_(std::move(basis)) {
  const int k = basis_.k();
  const int m = basis_.m();
  if (k * m > 12) throw Error("configuration space 2^(km) exceeds 4096");
  const Index n = dim();
  encoders_.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const ComplexMatrix c = cyclic_tensor(i);
    // E_i = C_i P_i: column d of E_i is column rot_i(d) of C_i.
    ComplexMatrix e(n, n);
    for (Index d = 0; d < n; ++d) {
      e.col(d) = c.col(static_cast<Index>(rotate_configuration(static_cast<std::uint64_t>(d), k, m, i)));
    }
    if (n <= kEncoderCheckLimit && !is_unitary(e)) {
      throw Error("encoder E_" + std::to_string(i) + " failed unitarity certification");
    }
    encoders_.push_back(std::move(e));
  }
}

const ComplexMatrix& EncodingFamily::encoder(int i) const {
  if (i < 0 || i >= k()) throw Error("encoding index " + std::to_string(i) + " out of range");
  return encoders_[static_cast<std::size_t>(i)];
}

ComplexMatrix EncodingFamily::cyclic_tensor(int i) const {
  if (i < 0 || i >= k()) throw Error("encoding index " + std::to_string(i) + " out of range");
  ComplexMatrix c = basis_[i];
  for (int p = 1; p < k(); ++p) c = tensor_product(c, basis_[(i + p) % k()]);
  return c;
}

ComplexMatrix EncodingFamily::permutation(int i) const { return rotation_permutation(k(), m(), i); }

nlohmann::json EncodingFamily::descriptor() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind()));
  j["k"] = k();
  j["m"] = m();
  const FamilyProvenance& prov = basis_.provenance();
  if (prov.seed) j["seed"] = *prov.seed;
  if (prov.stream) j["stream"] = *prov.stream;
  if (prov.factor_dim) j["r"] = *prov.factor_dim;
  if (kind() == FamilyKind::explicit_matrices || kind() == FamilyKind::random || kind() == FamilyKind::tensorized) {
    nlohmann::json mats = nlohmann::json::array();
    for (const ComplexMatrix& a : basis_.matrices()) mats.push_back(matrix_to_json(a));
    j["matrices"] = std::move(mats);
  }
  return j;
}

EncodingFamily build_family(ItemBasisFamily basis) { return EncodingFamily(std::move(basis)); }

ComplexMatrix walsh_matrix(int m) {
  if (m < 1) throw Error("walsh_matrix: m must be at least 1");
  const double s = 1.0 / std::numbers::sqrt2;
  ComplexMatrix w2(2, 2);
  w2 << s, s, -s, s;
  return tensor_power(w2, m);
}

EncodingFamily explicit_single_bit_family() {
  const double s = 1.0 / std::numbers::sqrt2;
  ComplexMatrix e0(4, 4), e1(4, 4);
  // clang-format off
  e0 << s,  s, 0,  0,
        s, -s, 0,  0,
        0,  0, s,  s,
        0,  0, s, -s;
  e1 << s,  s, 0,  0,
        0,  0, s,  s,
        s, -s, 0,  0,
        0,  0, s, -s;
  // clang-format on
  EncodingFamily family(ItemBasisFamily(FamilyKind::explicit_matrices, 2, 1, {identity(2), alpha1()}));
  if (!approx_equal(family.encoder(0), e0, 1e-15) || !approx_equal(family.encoder(1), e1, 1e-15)) {
    throw Error("explicit single-bit encoders disagree with their tensor construction");
  }
  return family;
}

EncodingFamily walsh_family(int m) {
  if (m < 1) throw Error("walsh_family: m must be at least 1");
  return EncodingFamily(ItemBasisFamily(FamilyKind::walsh, 2, m, {identity(Index{1} << m), walsh_matrix(m)}));
}

ItemBasisFamily mub_family(int k, int m) {
  if (m < 1 || m > gf::kMaxDegree) throw Error("mub_family: m out of range");
  if (k < 2) throw Error("mub_family: k must be at least 2");
  const long long limit = (1LL << m) + 1;
  if (k > limit) {
    throw Error("mub_family: family size " + std::to_string(k) + " exceeds 2^m+1 = " + std::to_string(limit));
  }
  const Index l = Index{1} << m;
  std::vector<ComplexMatrix> mats;
  mats.push_back(identity(l));
  if (k <= 3) {
    mats.push_back(tensor_power(alpha1(), m));
    if (k == 3) mats.push_back(tensor_power(alpha2(), m));
  } else {
    const ComplexMatrix w = walsh_matrix(m);
    for (int a = 0; a < k - 1; ++a) mats.push_back(quadratic_phase(static_cast<gf::Element>(a), m) * w);
  }
  return ItemBasisFamily(FamilyKind::mub, k, m, std::move(mats));
}

ItemBasisFamily cyclic_family(int k, int m) {
  if (k != 3) throw Error("cyclic_family: no known construction for k = " + std::to_string(k) + " (only k = 3)");
  if (m < 1) throw Error("cyclic_family: m must be at least 1");
  const Complex phase = std::polar(1.0 / std::numbers::sqrt2, std::numbers::pi / 12.0);
  const Complex i(0.0, 1.0);
  ComplexMatrix a2(2, 2);
  a2 << phase, phase, -i * phase, i * phase;
  const ComplexMatrix a = tensor_power(a2, m);
  return ItemBasisFamily(FamilyKind::cyclic, 3, m, {identity(a.rows()), a, a * a});
}

ItemBasisFamily random_family(int k, int m, SeededRng& rng) {
  if (k < 2 || m < 1) throw Error("random_family: need k >= 2 and m >= 1");
  const FamilyProvenance prov{rng.seed(), rng.stream(), std::nullopt};
  std::vector<ComplexMatrix> mats;
  for (int i = 0; i < k; ++i) mats.push_back(haar_unitary(Index{1} << m, rng));
  return ItemBasisFamily(FamilyKind::random, k, m, std::move(mats), prov);
}

ItemBasisFamily tensorized_family(int k, int m, int r, SeededRng& rng) {
  if (k < 2 || m < 1) throw Error("tensorized_family: need k >= 2 and m >= 1");
  if (r < 2 || (r & (r - 1)) != 0) throw Error("tensorized_family: r must be a power of 2, got " + std::to_string(r));
  const int log_r = std::countr_zero(static_cast<unsigned>(r));
  if (m % log_r != 0) {
    throw Error("tensorized_family: log2(r) = " + std::to_string(log_r) + " does not divide m = " + std::to_string(m));
  }
  const FamilyProvenance prov{rng.seed(), rng.stream(), r};
  std::vector<ComplexMatrix> mats;
  for (int i = 0; i < k; ++i) mats.push_back(tensor_power(haar_unitary(r, rng), m / log_r));
  return ItemBasisFamily(FamilyKind::tensorized, k, m, std::move(mats), prov);
}

EncodingFamily family_from_descriptor(const nlohmann::json& descriptor) {
  const FamilyKind kind = family_kind_from_string(descriptor.at("kind").get<std::string>());
  const int k = descriptor.at("k").get<int>();
  const int m = descriptor.at("m").get<int>();
  switch (kind) {
    case FamilyKind::walsh:
      if (k != 2) throw Error("walsh descriptor must have k = 2");
      return walsh_family(m);
    case FamilyKind::mub: return EncodingFamily(mub_family(k, m));
    case FamilyKind::cyclic: return EncodingFamily(cyclic_family(k, m));
    case FamilyKind::tensorized:
      // The seed and stream alone do not say how far the generator had
      // advanced, so the matrices are authoritative when present.
      if (!descriptor.contains("matrices")) {
        SeededRng rng(descriptor.at("seed").get<std::uint64_t>(), descriptor.value("stream", std::uint64_t{0}));
        return EncodingFamily(tensorized_family(k, m, descriptor.at("r").get<int>(), rng));
      }
      [[fallthrough]];
    case FamilyKind::random:
    case FamilyKind::explicit_matrices: {
      std::vector<ComplexMatrix> mats;
      for (const auto& mj : descriptor.at("matrices")) mats.push_back(matrix_from_json(mj));
      FamilyProvenance prov;
      if (descriptor.contains("seed")) prov.seed = descriptor["seed"].get<std::uint64_t>();
      if (descriptor.contains("stream")) prov.stream = descriptor["stream"].get<std::uint64_t>();
      if (descriptor.contains("r")) prov.factor_dim = descriptor["r"].get<int>();
      return EncodingFamily(ItemBasisFamily(kind, k, m, std::move(mats), prov));
    }
  }
  throw Error("unsupported family descriptor");
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j[r].size()) != cols) throw Error("matrix_from_json: ragged rows");
    for (Index c = 0; c < cols; ++c) m(r, c) = Complex(j[r][c].at(0).get<double>(), j[r][c].at(1).get<double>());
  }
  return m;
}

}  // namespace obliq
