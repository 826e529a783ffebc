#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qecopt {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Thrown for malformed arguments: bad dimensions, out-of-range probabilities,
// violated type invariants.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace linalg {

Matrix kron(const Matrix& a, const Matrix& b);

// Hermitian part (A + A^dag)/2.
Matrix hermitian_part(const Matrix& a);

double frobenius_sq(const Matrix& a);

// Principal square root of a PSD matrix (negative eigenvalues clipped to zero).
Matrix psd_sqrt(const Matrix& x);

// Sum of singular values.
double nuclear_norm(const Matrix& a);

// Orthonormal basis of the orthogonal complement of range(q), where q has
// orthonormal columns. Deterministic (Householder QR).
Matrix orthogonal_complement(const Matrix& q);

// Rescale each column so its first entry with |z| > tol is real positive.
void fix_column_phases(Matrix& q, double tol = 1e-12);

// Haar-distributed rows x cols isometry (rows >= cols): complex Gaussian
// matrix, QR, then R's diagonal made positive.
Matrix haar_isometry(Index rows, Index cols, std::mt19937_64& rng);

// Deterministic 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

}  // namespace linalg
}  // namespace qecopt
