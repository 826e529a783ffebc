#include "qecopt/codes.hpp"

#include <array>
#include <cmath>
#include <map>

namespace qecopt {

void Encoding::validate(double tol) const {
  if (n_s < 1 || C.cols() != n_s) throw InputError("encoding: column count must equal n_S");
  if (n_ca < 1 || C.rows() != n_s * n_ca) throw InputError("encoding: n_C must equal n_S * n_CA");
  const double err = (C.adjoint() * C - Matrix::Identity(n_s, n_s)).norm();
  if (err > tol) throw InputError("encoding is not an isometry (error " + std::to_string(err) + ")");
}

Encoding Encoding::from_matrix(Matrix c, std::string name) {
  Encoding e;
  e.n_s = c.cols();
  if (e.n_s < 1 || c.rows() % e.n_s != 0) throw InputError("encoding: n_S must divide n_C");
  e.n_ca = c.rows() / e.n_s;
  e.C = std::move(c);
  e.name = std::move(name);
  return e;
}

std::vector<Matrix> Recovery::blocks() const {
  std::vector<Matrix> out;
  for (Index r = 0; r < block_count(); ++r) out.emplace_back(block(r));
  return out;
}

void Recovery::validate(double tol) const {
  if (n_s < 1 || R.rows() % n_s != 0) throw InputError("recovery: rows must be a multiple of n_S");
  if (R.rows() != R.cols() * n_ra) throw InputError("recovery: rows must equal n_C * n_RA");
  const Index n_c = R.cols();
  const double err = (R.adjoint() * R - Matrix::Identity(n_c, n_c)).norm();
  if (err > tol) throw InputError("recovery is not an isometry (error " + std::to_string(err) + ")");
}

Recovery Recovery::from_blocks(const std::vector<Matrix>& blocks, Index n_ra) {
  if (blocks.empty()) throw InputError("recovery: no blocks");
  Recovery out;
  out.n_s = blocks.front().rows();
  out.n_ra = n_ra;
  const Index n_c = blocks.front().cols();
  out.R.resize(out.n_s * static_cast<Index>(blocks.size()), n_c);
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    if (blocks[r].rows() != out.n_s || blocks[r].cols() != n_c)
      throw InputError("recovery: blocks have inconsistent shapes");
    out.R.middleRows(static_cast<Index>(r) * out.n_s, out.n_s) = blocks[r];
  }
  return out;
}

Matrix pauli_string(const std::string& word) {
  static const std::map<char, Matrix> single = [] {
    std::map<char, Matrix> m;
    Matrix i = Matrix::Identity(2, 2), x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    m['I'] = i;
    m['X'] = x;
    m['Y'] = y;
    m['Z'] = z;
    return m;
  }();
  Matrix out = Matrix::Ones(1, 1);
  for (char c : word) {
    auto it = single.find(c);
    if (it == single.end()) throw InputError(std::string("invalid Pauli letter '") + c + "'");
    out = linalg::kron(out, it->second);
  }
  return out;
}

const std::vector<std::string>& stabilizers_513() {
  static const std::vector<std::string> gens{"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"};
  return gens;
}

namespace {

constexpr Index kDim5 = 32;

// Projector onto the joint eigenspace with eigenvalue (-1)^bit_k of generator k.
Matrix syndrome_projector_513(unsigned syndrome) {
  Matrix proj = Matrix::Identity(kDim5, kDim5);
  const auto& gens = stabilizers_513();
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const double sign = ((syndrome >> k) & 1u) ? -1.0 : 1.0;
    proj = proj * (0.5 * (Matrix::Identity(kDim5, kDim5) + sign * pauli_string(gens[k])));
  }
  return proj;
}

// Syndrome bit k is set when the Pauli anticommutes with generator k.
unsigned syndrome_of(const std::string& pauli) {
  unsigned s = 0;
  const auto& gens = stabilizers_513();
  for (std::size_t k = 0; k < gens.size(); ++k) {
    int anti = 0;
    for (std::size_t q = 0; q < pauli.size(); ++q) {
      const char a = pauli[q], b = gens[k][q];
      if (a != 'I' && b != 'I' && a != b) ++anti;
    }
    if (anti % 2) s |= 1u << k;
  }
  return s;
}

}  // namespace

Encoding code_513() {
  const Matrix proj = syndrome_projector_513(0);
  Matrix c(kDim5, 2);
  c.col(0) = proj.col(0);            // P |00000>
  c.col(1) = proj.col(kDim5 - 1);    // P |11111>
  for (Index j = 0; j < 2; ++j) c.col(j).normalize();
  linalg::fix_column_phases(c);
  Encoding e = Encoding::from_matrix(std::move(c), "513");
  return e;
}

Encoding code_dfs4() {
  // Singlet on qubit pair (a, b) tensored with singlet on (c, d).
  auto singlet_pair = [](std::array<int, 4> order) {
    Vector v = Vector::Zero(16);
    const double h = 0.5;
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) {
        // |01> - |10> on each pair
        std::array<int, 4> bits{};
        bits[order[0]] = s1;
        bits[order[1]] = 1 - s1;
        bits[order[2]] = s2;
        bits[order[3]] = 1 - s2;
        const int idx = bits[0] * 8 + bits[1] * 4 + bits[2] * 2 + bits[3];
        const double sign = (s1 ? -1.0 : 1.0) * (s2 ? -1.0 : 1.0);
        v(idx) += sign * h;
      }
    return v;
  };
  Vector first = singlet_pair({0, 1, 2, 3});
  Vector second = singlet_pair({0, 2, 1, 3});
  second -= first * first.dot(second);
  second.normalize();
  Matrix c(16, 2);
  c.col(0) = first;
  c.col(1) = second;
  linalg::fix_column_phases(c);
  return Encoding::from_matrix(std::move(c), "dfs4");
}

Recovery standard_recovery_513() {
  const Encoding code = code_513();
  std::map<unsigned, std::string> correction;
  correction[0] = "IIIII";
  for (int q = 0; q < 5; ++q)
    for (char p : {'X', 'Y', 'Z'}) {
      std::string w(5, 'I');
      w[q] = p;
      correction[syndrome_of(w)] = w;
    }
  if (correction.size() != 16) throw std::logic_error("five-qubit code syndromes are not unique");

  std::vector<Matrix> blocks;
  for (const auto& [syn, word] : correction)
    blocks.push_back(code.C.adjoint() * pauli_string(word) * syndrome_projector_513(syn));
  return Recovery::from_blocks(blocks, 1);
}

Recovery decode_recovery(const Encoding& code) {
  const Matrix comp = linalg::orthogonal_complement(code.C);
  std::vector<Matrix> blocks{code.C.adjoint()};
  for (Index k = 0; k + code.n_s <= comp.cols(); k += code.n_s)
    blocks.push_back(comp.middleCols(k, code.n_s).adjoint());
  return Recovery::from_blocks(blocks, 1);
}

Encoding random_isometry(Index n_c, Index n_s, std::uint64_t seed) {
  if (n_s < 1 || n_c < n_s || n_c % n_s != 0)
    throw InputError("random_isometry: n_S must divide n_C");
  std::mt19937_64 rng(seed);
  return Encoding::from_matrix(linalg::haar_isometry(n_c, n_s, rng), "random");
}

}  // namespace qecopt
