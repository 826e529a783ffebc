#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qecopt/linalg.hpp"

namespace qecopt {

// Qubits are numbered 0..n-1; qubit 0 is the most significant tensor factor.
using Support = std::vector<int>;

struct ModelMeta {
  std::string family;  // "bitflip", "random_unitary", "pooled", "custom"
  int weight = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  int pool_size = 1;
};

/// Error system matrix E = [E_1 ... E_mE] stored as its operation elements.
/// Every constructor output is trace preserving: sum_e E_e^dag E_e = I.
struct ErrorModel {
  int n_qubits = 0;
  Index dim = 0;
  std::vector<Matrix> elements;
  std::vector<std::string> labels;
  ModelMeta meta;

  Index size() const { return static_cast<Index>(elements.size()); }

  // || sum_e E_e^dag E_e - I ||_F
  double trace_preservation_error() const;
  bool is_trace_preserving(double tol = 1e-10) const;

  // Throws InputError on empty models or mis-shaped elements.
  void validate() const;
};

enum class UnitaryMode { collective, independent };

// All subsets of {0..n-1} of size <= w, ordered by (size, lexicographic).
std::vector<Support> enumerate_supports(int n_qubits, int w);

// Pattern probabilities q(S)/Z with q(S) = p^|S| (1-p)^(n-|S|) and Z the sum
// of q over all supports of size <= w.
std::vector<double> pattern_probabilities(int n_qubits, int w, double p);

// Single-qubit operator `op` applied on every qubit in S, identity elsewhere.
Matrix pattern_operator(int n_qubits, const Support& s, const Matrix& op);

// Generic independent-errors model: element for support S is
// sqrt(q(S)/Z) * (op(S) on each qubit of S). op must return a 2x2 unitary.
ErrorModel pattern_model(int n_qubits, int w, double p,
                         const std::function<Matrix(std::size_t, const Support&)>& op);

ErrorModel bitflip_model(int n_qubits, int w, double p);

ErrorModel random_unitary_model(int n_qubits, int w, double p, UnitaryMode mode,
                                std::uint64_t seed);

// Haar-random 2x2 unitary.
Matrix haar_unitary_2x2(std::mt19937_64& rng);

// Average-case pooling: concatenation of all elements scaled by 1/sqrt(l).
ErrorModel pool_average(const std::vector<ErrorModel>& models);

}  // namespace qecopt
