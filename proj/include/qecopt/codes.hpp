#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qecopt/linalg.hpp"

namespace qecopt {

/// Encoding isometry C (n_C x n_S); columns are the codewords.
struct Encoding {
  Matrix C;
  Index n_s = 0;
  Index n_ca = 0;
  std::string name;

  Index n_c() const { return C.rows(); }
  Matrix projector() const { return C * C.adjoint(); }
  void validate(double tol = 1e-10) const;

  static Encoding from_matrix(Matrix c, std::string name);
};

/// Stacked recovery matrix R ((n_C n_RA) x n_C) with n_S x n_C blocks R_r.
struct Recovery {
  Matrix R;
  Index n_s = 0;
  Index n_ra = 1;

  Index block_count() const { return n_s ? R.rows() / n_s : 0; }
  auto block(Index r) const { return R.middleRows(r * n_s, n_s); }
  std::vector<Matrix> blocks() const;
  void validate(double tol = 1e-10) const;

  static Recovery from_blocks(const std::vector<Matrix>& blocks, Index n_ra);
};

// Pauli string over {I,X,Y,Z}, qubit 0 leftmost.
Matrix pauli_string(const std::string& word);

// Stabilizer generators of the five-qubit code (cyclic XZZXI family).
const std::vector<std::string>& stabilizers_513();

Encoding code_513();
Encoding code_dfs4();
Recovery standard_recovery_513();
Recovery decode_recovery(const Encoding& code);
Encoding random_isometry(Index n_c, Index n_s, std::uint64_t seed);

}  // namespace qecopt
