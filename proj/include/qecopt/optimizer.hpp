#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "qecopt/channel_models.hpp"
#include "qecopt/codes.hpp"
#include "qecopt/performance.hpp"

namespace qecopt {

/// gamma = alpha^dag alpha: Hermitian, PSD, unit trace, indexed like the
/// error elements.
struct GammaMatrix {
  Matrix value;

  Index size() const { return value.rows(); }
  void validate(double tol = 1e-10) const;
};

struct SolveReport {
  std::vector<double> objective;  // g(gamma) per FW iteration, or f_avg per round
  std::vector<double> d_ind;      // bi-convex loop only
  double gap = 0.0;               // final Frank-Wolfe gap
  int iterations = 0;             // FW iterations (summed over rounds in the bi-convex loop)
  int rounds = 0;
  bool converged = false;
  bool monotone = true;
  bool degenerate = false;
  std::chrono::duration<double, std::milli> wall{0};
};

struct TraceSqrt {
  double value = 0.0;
  // Hermitian G with d g = Re Tr(G dgamma) for Hermitian dgamma.
  Matrix grad;
};

// g(gamma) = Tr sqrt(X), X = sum_ij gamma_ij E_i C C^dag E_j^dag.
double trace_sqrt_value(const GammaMatrix& gamma, const ErrorModel& model, const Encoding& code);
TraceSqrt trace_sqrt_value_grad(const GammaMatrix& gamma, const ErrorModel& model,
                                const Encoding& code);

struct GammaOptions {
  double gap_tol = 1e-7;
  int max_iters = 500;
  // Interleave the alternating (alpha, R) ascent step with every FW step and
  // keep whichever point scores higher. The FW gap stays the certificate.
  bool alternating_steps = true;
  // Damped Newton step on the face spanned by gamma's support, every third
  // iteration from the fifth once the gap is below 1e-4. Skipped when the
  // support exceeds 16.
  bool newton_steps = true;
};

std::pair<GammaMatrix, SolveReport> optimal_gamma(const ErrorModel& model, const Encoding& code,
                                                  const TargetGate& target,
                                                  const GammaOptions& opts = {},
                                                  const std::optional<GammaMatrix>& warm = {});

// Diagonal gamma_ii = ||E_i||_F^2 / n_C.
GammaMatrix gamma_approx(const ErrorModel& model);

struct RecoveryDesign {
  Recovery recovery;
  AlphaMatrix alpha;
  double achieved = 0.0;  // Re Tr R M = sum of singular values of M
};

// Smallest n_RA with n_CA * n_RA >= m_E.
Index recovery_ancilla_dim(Index n_ca, Index m_e);

RecoveryDesign recovery_from_gamma(const ErrorModel& model, const Encoding& code,
                                   const GammaMatrix& gamma, const TargetGate& target);

struct EncodingDesign {
  Matrix relaxed;           // argmin of d_ind over C^dag C <= I
  Encoding rounded;         // singular values of `relaxed` replaced by one
  double relaxed_objective = 0.0;
  double rounded_objective = 0.0;
  bool degenerate = false;  // rank(K) < n_S
  bool closed_form = true;  // false when the projected-gradient fallback ran
  int iterations = 0;
};

// d_ind as a function of C for fixed (R, alpha, E, L).
double encoding_objective(const Matrix& c, const Recovery& rec, const AlphaMatrix& alpha,
                          const ErrorModel& model, const TargetGate& target);

// K = sum_{r,e} alpha_{re} E_e^dag R_r^dag L.
Matrix encoding_target(const Recovery& rec, const AlphaMatrix& alpha, const ErrorModel& model,
                       const TargetGate& target);

// Projection onto {C : ||C||_op <= 1} by clipping singular values at one.
Matrix clip_singular_values(const Matrix& c);

EncodingDesign optimal_encoding(const Recovery& rec, const AlphaMatrix& alpha,
                                const ErrorModel& model, const TargetGate& target,
                                int pgd_max_iters = 20000, double pgd_tol = 1e-13);

enum class GammaStep { exact, approx };

struct BiconvexOptions {
  GammaStep step = GammaStep::approx;
  GammaOptions gamma;
  int max_rounds = 100;
  double rel_tol = 1e-5;
  double monotone_slack = 1e-9;
};

struct BiconvexResult {
  Encoding code;
  Recovery recovery;
  AlphaMatrix alpha;
  GammaMatrix gamma;
  double fidelity = 0.0;
  SolveReport report;
};

BiconvexResult biconvex_iterate(const ErrorModel& model, const Encoding& start,
                                const TargetGate& target, const BiconvexOptions& opts = {});

// Minimal Kraus form: unitarily mixes the elements into rank(E) mutually
// HS-orthogonal elements. Leaves the channel, f_avg and max_gamma g unchanged.
ErrorModel compress_model(const ErrorModel& model, double rel_tol = 1e-12);

}  // namespace qecopt
