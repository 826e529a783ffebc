#pragma once

#include <utility>
#include <vector>

#include "qecopt/channel_models.hpp"
#include "qecopt/codes.hpp"
#include "qecopt/linalg.hpp"

namespace qecopt {

/// Desired logical unitary L_S.
struct TargetGate {
  Matrix L;

  static TargetGate identity(Index n_s);
  void validate(double tol = 1e-12) const;
};

/// Proportionality constants alpha_{re}: rows follow recovery blocks, columns
/// follow error elements.
struct AlphaMatrix {
  Matrix value;

  void validate(double tol = 1e-10) const;
};

// f_avg = (1/n_S^2) sum_{r,e} |Tr L^dag R_r E_e C|^2
double average_fidelity(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                        const TargetGate& target);

// d_ind = sum_{r,e} ||R_r E_e C - alpha_{re} L||_F^2
double indirect_distance(const Recovery& rec, const AlphaMatrix& alpha, const ErrorModel& model,
                         const Encoding& code, const TargetGate& target);

// n_S + Tr E(I (x) CC^dag)E^dag - 2 Re Tr R E(alpha^dag (x) C L^dag)
double indirect_distance_expanded(const Recovery& rec, const AlphaMatrix& alpha,
                                  const ErrorModel& model, const Encoding& code,
                                  const TargetGate& target);

// The overlap table T_{re} = Tr(L^dag R_r E_e C).
Matrix overlap_table(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                     const TargetGate& target);

// alpha_{re} = Tr(L^dag R_r E_e C) / n_S, normalized to unit Frobenius norm
// (left unnormalized when it vanishes).
AlphaMatrix induced_alpha(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                          const TargetGate& target);

// M = E (alpha^dag (x) C L^dag), an n_C x (n_S * rows(alpha)) matrix whose
// block column r is sum_e conj(alpha_{re}) E_e C L^dag.
Matrix build_M(const ErrorModel& model, const AlphaMatrix& alpha, const Encoding& code,
               const TargetGate& target);

struct WorstCase {
  double fidelity = 0.0;
  std::size_t index = 0;
};

WorstCase worst_case_fidelity(const Recovery& rec, const std::vector<ErrorModel>& models,
                              const Encoding& code, const TargetGate& target);

}  // namespace qecopt
