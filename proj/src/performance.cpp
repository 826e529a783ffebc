#include "qecopt/performance.hpp"

#include <cmath>

namespace qecopt {

TargetGate TargetGate::identity(Index n_s) { return TargetGate{Matrix::Identity(n_s, n_s)}; }

void TargetGate::validate(double tol) const {
  if (L.rows() != L.cols() || L.rows() < 1) throw InputError("target gate must be square");
  if ((L.adjoint() * L - Matrix::Identity(L.rows(), L.cols())).norm() > tol)
    throw InputError("target gate is not unitary");
}

void AlphaMatrix::validate(double tol) const {
  if (std::abs(value.norm() - 1.0) > tol) throw InputError("alpha must have unit Frobenius norm");
}

namespace {

void check_dims(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                const TargetGate& target) {
  model.validate();
  if (code.C.rows() != model.dim) throw InputError("encoding and error model dimensions differ");
  if (rec.R.cols() != model.dim) throw InputError("recovery and error model dimensions differ");
  if (rec.n_s != code.C.cols() || rec.R.rows() % rec.n_s != 0)
    throw InputError("recovery block size must equal n_S");
  if (target.L.rows() != code.C.cols() || target.L.cols() != code.C.cols())
    throw InputError("target gate must be n_S x n_S");
}

// B_e = E_e C for every element.
std::vector<Matrix> encoded_errors(const ErrorModel& model, const Encoding& code) {
  std::vector<Matrix> out;
  out.reserve(model.elements.size());
  for (const auto& e : model.elements) out.push_back(e * code.C);
  return out;
}

}  // namespace

Matrix overlap_table(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                     const TargetGate& target) {
  check_dims(rec, model, code, target);
  const auto b = encoded_errors(model, code);
  const Index m_r = rec.block_count();
  Matrix t(m_r, model.size());
  const Matrix ldag = target.L.adjoint();
  for (Index r = 0; r < m_r; ++r) {
    const Matrix lr = ldag * rec.block(r);
    for (Index e = 0; e < model.size(); ++e) t(r, e) = (lr * b[e]).trace();
  }
  return t;
}

double average_fidelity(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                        const TargetGate& target) {
  const Matrix t = overlap_table(rec, model, code, target);
  const double n_s = static_cast<double>(code.n_s);
  return t.squaredNorm() / (n_s * n_s);
}

double indirect_distance(const Recovery& rec, const AlphaMatrix& alpha, const ErrorModel& model,
                         const Encoding& code, const TargetGate& target) {
  check_dims(rec, model, code, target);
  if (alpha.value.cols() != model.size()) throw InputError("alpha columns must equal m_E");
  const auto b = encoded_errors(model, code);
  const Index m_r = rec.block_count();
  double total = 0.0;
  for (Index r = 0; r < m_r; ++r) {
    for (Index e = 0; e < model.size(); ++e) {
      const cplx a = r < alpha.value.rows() ? alpha.value(r, e) : cplx(0.0);
      total += (rec.block(r) * b[e] - a * target.L).squaredNorm();
    }
  }
  // Rows of alpha beyond the recovery's block count pair with empty blocks.
  for (Index r = m_r; r < alpha.value.rows(); ++r)
    total += alpha.value.row(r).squaredNorm() * target.L.squaredNorm();
  return total;
}

double indirect_distance_expanded(const Recovery& rec, const AlphaMatrix& alpha,
                                  const ErrorModel& model, const Encoding& code,
                                  const TargetGate& target) {
  check_dims(rec, model, code, target);
  const Matrix cc = code.projector();
  double leak = 0.0;
  for (const auto& e : model.elements) leak += (e * cc * e.adjoint()).trace().real();

  AlphaMatrix padded = alpha;
  if (padded.value.rows() < rec.block_count()) {
    padded.value = Matrix::Zero(rec.block_count(), alpha.value.cols());
    padded.value.topRows(alpha.value.rows()) = alpha.value;
  }
  const Matrix m = build_M(model, padded, code, target);
  const Index n_cols = std::min(m.cols(), rec.R.rows());
  const double cross = (rec.R.topRows(n_cols) * m.leftCols(n_cols)).trace().real();
  return alpha.value.squaredNorm() * target.L.squaredNorm() + leak - 2.0 * cross;
}

AlphaMatrix induced_alpha(const Recovery& rec, const ErrorModel& model, const Encoding& code,
                          const TargetGate& target) {
  Matrix t = overlap_table(rec, model, code, target) / static_cast<double>(code.n_s);
  const double nrm = t.norm();
  if (nrm > 0.0) t /= nrm;
  return AlphaMatrix{std::move(t)};
}

Matrix build_M(const ErrorModel& model, const AlphaMatrix& alpha, const Encoding& code,
               const TargetGate& target) {
  model.validate();
  if (alpha.value.cols() != model.size()) throw InputError("alpha columns must equal m_E");
  if (code.C.rows() != model.dim) throw InputError("encoding and error model dimensions differ");
  if (target.L.rows() != code.n_s) throw InputError("target gate must be n_S x n_S");
  const Index n_s = code.n_s;
  const Index m_r = alpha.value.rows();
  const Matrix cl = code.C * target.L.adjoint();
  std::vector<Matrix> ecl;
  ecl.reserve(model.elements.size());
  for (const auto& e : model.elements) ecl.push_back(e * cl);

  Matrix m = Matrix::Zero(model.dim, n_s * m_r);
  for (Index r = 0; r < m_r; ++r) {
    auto blk = m.middleCols(r * n_s, n_s);
    for (Index e = 0; e < model.size(); ++e) {
      const cplx a = alpha.value(r, e);
      if (a != cplx(0.0)) blk += std::conj(a) * ecl[e];
    }
  }
  return m;
}

WorstCase worst_case_fidelity(const Recovery& rec, const std::vector<ErrorModel>& models,
                              const Encoding& code, const TargetGate& target) {
  if (models.empty()) throw InputError("worst_case_fidelity: empty model list");
  WorstCase out{average_fidelity(rec, models[0], code, target), 0};
  for (std::size_t i = 1; i < models.size(); ++i) {
    const double f = average_fidelity(rec, models[i], code, target);
    if (f < out.fidelity) out = {f, i};
  }
  return out;
}

}  // namespace qecopt
