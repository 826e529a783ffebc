#include "qecopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qecopt {

void GammaMatrix::validate(double tol) const {
  if (value.rows() != value.cols() || value.rows() < 1) throw InputError("gamma must be square");
  if ((value - value.adjoint()).norm() > tol) throw InputError("gamma is not Hermitian");
  if (std::abs(value.trace().real() - 1.0) > tol) throw InputError("gamma must have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(value), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) throw InputError("gamma is not positive semidefinite");
}

namespace {

using Clock = std::chrono::steady_clock;

// B = [E_1 C ... E_m C]
Matrix stacked_encoded_errors(const ErrorModel& model, const Encoding& code) {
  const Index n_s = code.C.cols();
  Matrix b(model.dim, n_s * model.size());
  for (Index e = 0; e < model.size(); ++e) b.middleCols(e * n_s, n_s) = model.elements[e] * code.C;
  return b;
}

void check_gamma_problem(const GammaMatrix& gamma, const ErrorModel& model, const Encoding& code) {
  model.validate();
  if (code.C.rows() != model.dim) throw InputError("encoding and error model dimensions differ");
  if (gamma.value.rows() != model.size() || gamma.value.cols() != model.size())
    throw InputError("gamma must be m_E x m_E");
  const double scale = std::max(1.0, gamma.value.norm());
  if ((gamma.value - gamma.value.adjoint()).norm() > 1e-10 * scale)
    throw InputError("gamma is not Hermitian");
}

// F = B (sqrt(gamma) x I), so X = F F^dag and Tr sqrt(X) = ||F||_*.
Matrix gamma_factor(const Matrix& gamma, const Matrix& b, Index n_s) {
  return b * linalg::kron(linalg::psd_sqrt(gamma), Matrix::Identity(n_s, n_s));
}

// gamma built from an arbitrary PSD matrix: Hermitian part scaled to unit trace.
Matrix normalized_gamma(const Matrix& g) {
  Matrix h = linalg::hermitian_part(g);
  const double tr = h.trace().real();
  return tr > 0.0 ? Matrix(h / tr) : h;
}

// One step of the alternating maximization of ||M(alpha)||_*: R from the SVD
// of M(sqrt(gamma)), then alpha <- T / ||T|| with T the overlap table of R.
// Newton step for g restricted to {V Y V^dag : Y >= 0, Tr Y = 1}, V the
// support of gamma. Hessian of Tr sqrt(X) from the divided differences
// -1 / (s_k s_l (s_k + s_l)) in the singular basis of the factor.
Matrix newton_face_step(const Matrix& gamma, const ErrorModel& model, const Encoding& code) {
  const Index n_s = code.C.cols();
  Eigen::SelfAdjointEigenSolver<Matrix> eg(linalg::hermitian_part(gamma));
  std::vector<Index> support;
  for (Index k = 0; k < eg.eigenvalues().size(); ++k)
    if (eg.eigenvalues()(k) > 1e-13) support.push_back(k);
  const Index s = static_cast<Index>(support.size());
  if (s < 2 || s > 16) return gamma;
  Matrix vs(gamma.rows(), s);
  Eigen::VectorXd mu(s);
  for (Index k = 0; k < s; ++k) {
    vs.col(k) = eg.eigenvectors().col(support[k]);
    mu(k) = eg.eigenvalues()(support[k]);
  }
  const Matrix id_s = Matrix::Identity(n_s, n_s);
  const Matrix bt = stacked_encoded_errors(model, code) * linalg::kron(vs, id_s);
  Eigen::JacobiSVD<Matrix> svd(bt * linalg::kron(mu.cwiseSqrt().cast<cplx>().asDiagonal().toDenseMatrix(), id_s),
                               Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  Index r = 0;
  while (r < sv.size() && sv(r) > 1e-12 * sv(0)) ++r;
  if (r == 0) return gamma;
  const Matrix w = svd.matrixU().leftCols(r).adjoint() * bt;

  // Columns: vec of U^dag dX U for an orthonormal basis of Hermitian s x s,
  // scaled by sqrt of the divided differences.
  const Index np = s * s;
  auto pij = [&](Index i, Index j) -> Matrix {
    return w.middleCols(i * n_s, n_s) * w.middleCols(j * n_s, n_s).adjoint();
  };
  Matrix dx(r * r, np);
  std::vector<Matrix> basis;
  basis.reserve(np);
  Eigen::VectorXd trace_dir = Eigen::VectorXd::Zero(np);
  const double rt = std::sqrt(0.5);
  const cplx irt(0.0, rt);
  for (Index i = 0; i < s; ++i) {
    trace_dir(i) = 1.0;
    basis.push_back(Matrix::Zero(s, s));
    basis.back()(i, i) = 1.0;
    dx.col(i) = pij(i, i).reshaped();
  }
  Index a = s;
  for (Index i = 0; i < s; ++i)
    for (Index j = i + 1; j < s; ++j) {
      const Matrix pa = pij(i, j), pb = pij(j, i);
      basis.push_back(Matrix::Zero(s, s));
      basis.back()(i, j) = rt;
      basis.back()(j, i) = rt;
      dx.col(a++) = (rt * (pa + pb)).reshaped();
      basis.push_back(Matrix::Zero(s, s));
      basis.back()(i, j) = irt;
      basis.back()(j, i) = -irt;
      dx.col(a++) = (irt * pa - irt * pb).reshaped();
    }
  Eigen::VectorXd grad(np);
  for (Index b = 0; b < np; ++b) {
    double acc = 0.0;
    for (Index k = 0; k < r; ++k) acc += dx(k * r + k, b).real() / sv(k);
    grad(b) = 0.5 * acc;
  }
  for (Index l = 0; l < r; ++l)
    for (Index k = 0; k < r; ++k)
      dx.row(l * r + k) *= std::sqrt(0.5 / (sv(k) * sv(l) * (sv(k) + sv(l))));
  const Eigen::MatrixXd neg_hess = (dx.adjoint() * dx).real();

  // Solve on trace-zero directions, pseudo-inverse for flat directions.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(trace_dir / trace_dir.norm());
  const Eigen::MatrixXd z = Eigen::MatrixXd(qr.householderQ()).rightCols(np - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(z.transpose() * neg_hess * z);
  Eigen::VectorXd coef = eh.eigenvectors().transpose() * (z.transpose() * grad);
  const double cut = 1e-12 * std::max(eh.eigenvalues().maxCoeff(), 0.0);
  for (Index k = 0; k < coef.size(); ++k)
    coef(k) = eh.eigenvalues()(k) > cut ? coef(k) / eh.eigenvalues()(k) : 0.0;
  const Eigen::VectorXd step = z * (eh.eigenvectors() * coef);
  Matrix dy = Matrix::Zero(s, s);
  for (Index b = 0; b < np; ++b) dy += step(b) * basis[b];

  const Matrix y0 = mu.cast<cplx>().asDiagonal();
  for (double t = 1.0; t > 1e-4; t *= 0.5) {
    const Matrix y = y0 + t * dy;
    Eigen::SelfAdjointEigenSolver<Matrix> ey(linalg::hermitian_part(y), Eigen::EigenvaluesOnly);
    if (ey.eigenvalues().minCoeff() >= 0.0) return vs * y * vs.adjoint();
  }
  return gamma;
}

Matrix alternating_step(const Matrix& gamma, const ErrorModel& model, const Encoding& code,
                        const TargetGate& target) {
  const RecoveryDesign d = recovery_from_gamma(model, code, GammaMatrix{gamma}, target);
  Matrix t = overlap_table(d.recovery, model, code, target);
  const double nrm = t.norm();
  if (!(nrm > 0.0)) return gamma;
  t /= nrm;
  return linalg::hermitian_part(t.adjoint() * t);
}

// Orthonormal columns spanning range(u.leftCols(rank)) completed to `u.cols()`
// columns from the complement.
Matrix complete_columns(const Matrix& u, Index rank) {
  if (rank >= u.cols()) return u;
  Matrix out(u.rows(), u.cols());
  Matrix good = u.leftCols(rank);
  if (rank > 0) {
    Eigen::HouseholderQR<Matrix> qr(good);
    good = qr.householderQ() * Matrix::Identity(u.rows(), rank);
  }
  out.leftCols(rank) = u.leftCols(rank);
  Matrix comp = rank > 0 ? linalg::orthogonal_complement(good)
                         : Matrix(Matrix::Identity(u.rows(), u.rows()));
  out.rightCols(u.cols() - rank) = comp.leftCols(u.cols() - rank);
  return out;
}

Index numerical_rank(const Eigen::VectorXd& s, double rel) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  Index r = 0;
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) > rel * s(0)) ++r;
  return r;
}

// R = V U^dag from the thin SVD of M, so that R M = V S V^dag.
template <class Svd>
Matrix maximizing_isometry(const Matrix& mm) {
  const Index n_c = mm.rows();
  Svd svd(mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();
  const Index rank = numerical_rank(svd.singularValues(), 1e-13);
  if ((v.adjoint() * v - Matrix::Identity(n_c, n_c)).norm() > 1e-12) v = complete_columns(v, rank);
  if ((u.adjoint() * u - Matrix::Identity(n_c, n_c)).norm() > 1e-12) u = complete_columns(u, rank);
  return v * u.adjoint();
}

// Optimality certificate for max Re Tr(R M) over isometries: R M Hermitian PSD.
bool is_maximizer(const Matrix& r, const Matrix& mm) {
  const Matrix rm = r * mm;
  const double scale = std::max(mm.norm(), 1.0);
  if ((rm - rm.adjoint()).norm() > 1e-11 * scale) return false;
  if ((r.adjoint() * r - Matrix::Identity(r.cols(), r.cols())).norm() > 1e-11) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(rm), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-11 * scale;
}

}  // namespace

double trace_sqrt_value(const GammaMatrix& gamma, const ErrorModel& model, const Encoding& code) {
  check_gamma_problem(gamma, model, code);
  const Matrix f = gamma_factor(gamma.value, stacked_encoded_errors(model, code), code.C.cols());
  return Eigen::JacobiSVD<Matrix>(f).singularValues().sum();
}

TraceSqrt trace_sqrt_value_grad(const GammaMatrix& gamma, const ErrorModel& model,
                                const Encoding& code) {
  check_gamma_problem(gamma, model, code);
  const Index n_s = code.C.cols();
  const Index m = model.size();
  const Matrix b = stacked_encoded_errors(model, code);
  Eigen::JacobiSVD<Matrix> svd(gamma_factor(gamma.value, b, n_s), Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();

  // X^{-1/2} on the support: sigma^2 = lambda(X) above 1e-12 lambda_max.
  const double floor = sv.size() ? 1e-12 * sv(0) : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > floor && sv(rank) > 0.0) ++rank;
  const Matrix ub = svd.matrixU().leftCols(rank).adjoint() * b;
  const Eigen::VectorXd inv = sv.head(rank).cwiseInverse();

  // G_ij = 1/2 Tr(B_i^dag X^{-1/2} B_j): the block partial trace of B^dag Y B.
  const Matrix w = ub.adjoint() * inv.cast<cplx>().asDiagonal() * ub;
  Matrix g(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) g(i, j) = 0.5 * w.block(i * n_s, j * n_s, n_s, n_s).trace();
  return TraceSqrt{sv.sum(), linalg::hermitian_part(g)};
}

GammaMatrix gamma_approx(const ErrorModel& model) {
  model.validate();
  Matrix g = Matrix::Zero(model.size(), model.size());
  for (Index e = 0; e < model.size(); ++e)
    g(e, e) = model.elements[e].squaredNorm() / static_cast<double>(model.dim);
  return GammaMatrix{std::move(g)};
}

std::pair<GammaMatrix, SolveReport> optimal_gamma(const ErrorModel& model, const Encoding& code,
                                                  const TargetGate& target,
                                                  const GammaOptions& opts,
                                                  const std::optional<GammaMatrix>& warm) {
  const auto t0 = Clock::now();
  model.validate();
  code.validate();
  if (!model.is_trace_preserving(1e-8)) throw InputError("optimal_gamma: model is not trace preserving");

  const Index m = model.size();
  Matrix gamma = normalized_gamma(warm ? warm->value : gamma_approx(model).value);
  if (gamma.rows() != m) throw InputError("optimal_gamma: warm start has wrong size");

  SolveReport rep;
  if (m == 1) {
    rep.objective.push_back(trace_sqrt_value(GammaMatrix{gamma}, model, code));
    rep.converged = true;
    rep.wall = Clock::now() - t0;
    return {GammaMatrix{gamma}, rep};
  }

  auto value_of = [&](const Matrix& g) { return trace_sqrt_value(GammaMatrix{g}, model, code); };

  constexpr double noise = 1e-14;
  double lipschitz = 1.0;
  Matrix best = gamma;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const TraceSqrt vg = trace_sqrt_value_grad(GammaMatrix{gamma}, model, code);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(vg.grad);
    const Index top = m - 1;
    const double lmax = eig.eigenvalues()(top);
    const double gap = lmax - (vg.grad * gamma).trace().real();
    rep.objective.push_back(vg.value);
    rep.gap = std::max(gap, 0.0);
    rep.iterations = it;
    if (gap <= opts.gap_tol) {
      rep.converged = true;
      break;
    }
    if (it >= opts.max_iters) break;

    const Vector v = eig.eigenvectors().col(top);
    const Matrix dir = v * v.adjoint() - gamma;
    const double dn2 = dir.squaredNorm();

    // Backtracking on a local Lipschitz estimate of the gradient.
    Matrix next = gamma;
    double next_val = vg.value;
    for (int bt = 0; bt < 60; ++bt) {
      const double t = std::min(1.0, gap / (lipschitz * dn2));
      const Matrix cand = gamma + t * dir;
      const double cv = value_of(cand);
      if (cv >= vg.value + t * gap - 0.5 * t * t * lipschitz * dn2) {
        if (cv > next_val) {
          next = cand;
          next_val = cv;
        }
        lipschitz *= 0.5;
        break;
      }
      lipschitz *= 2.0;
    }

    if (opts.alternating_steps) {
      const Matrix alt = alternating_step(next, model, code, target);
      const double av = value_of(alt);
      if (av >= next_val - noise * std::max(1.0, next_val)) {
        next = alt;
        next_val = av;
      }
    }
    if (opts.newton_steps && gap < 1e-4 && it >= 5 && (it - 5) % 3 == 0) {
      const Matrix nt = newton_face_step(next, model, code);
      const double nv = value_of(nt);
      if (nv >= next_val - noise * std::max(1.0, next_val)) {
        next = nt;
        next_val = nv;
      }
    }
    if (gap < best_gap) {
      best = gamma;
      best_gap = gap;
    }
    // The alternating step ascends in exact arithmetic; near the optimum its
    // gain falls below rounding, so it is kept while the value holds.
    if (next_val < vg.value - noise * std::max(1.0, vg.value)) break;
    gamma = normalized_gamma(next);
  }
  if (!rep.converged && best_gap < rep.gap) {
    gamma = best;
    rep.gap = std::max(best_gap, 0.0);
  }
  rep.wall = Clock::now() - t0;
  return {GammaMatrix{gamma}, rep};
}

Index recovery_ancilla_dim(Index n_ca, Index m_e) {
  if (n_ca < 1 || m_e < 1) throw InputError("recovery_ancilla_dim: dimensions must be positive");
  return std::max<Index>(1, (m_e + n_ca - 1) / n_ca);
}

RecoveryDesign recovery_from_gamma(const ErrorModel& model, const Encoding& code,
                                   const GammaMatrix& gamma, const TargetGate& target) {
  check_gamma_problem(gamma, model, code);
  const Index n_s = code.n_s;
  const Index m = model.size();
  const Index n_ra = recovery_ancilla_dim(code.n_ca, m);
  const Index m_r = code.n_ca * n_ra;

  AlphaMatrix alpha{Matrix::Zero(m_r, m)};
  alpha.value.topRows(m) = linalg::psd_sqrt(gamma.value);
  const Matrix mm = build_M(model, alpha, code, target);

  RecoveryDesign out;
  out.recovery.R = maximizing_isometry<Eigen::BDCSVD<Matrix>>(mm);
  if (!is_maximizer(out.recovery.R, mm)) out.recovery.R = maximizing_isometry<Eigen::JacobiSVD<Matrix>>(mm);
  out.recovery.n_s = n_s;
  out.recovery.n_ra = n_ra;
  out.alpha = std::move(alpha);
  out.achieved = (out.recovery.R * mm).trace().real();
  return out;
}

Matrix encoding_target(const Recovery& rec, const AlphaMatrix& alpha, const ErrorModel& model,
                       const TargetGate& target) {
  model.validate();
  if (rec.R.cols() != model.dim) throw InputError("recovery and error model dimensions differ");
  if (alpha.value.cols() != model.size()) throw InputError("alpha columns must equal m_E");
  const Index m_r = std::min(rec.block_count(), alpha.value.rows());
  const Index n_s = rec.n_s;
  Matrix k = Matrix::Zero(model.dim, n_s);
  for (Index e = 0; e < model.size(); ++e) {
    Matrix acc = Matrix::Zero(model.dim, n_s);
    for (Index r = 0; r < m_r; ++r) {
      const cplx a = alpha.value(r, e);
      if (a != cplx(0.0)) acc += a * rec.block(r).adjoint();
    }
    k.noalias() += model.elements[e].adjoint() * acc;
  }
  return k * target.L;
}

double encoding_objective(const Matrix& c, const Recovery& rec, const AlphaMatrix& alpha,
                          const ErrorModel& model, const TargetGate& target) {
  const Index m_r = rec.block_count();
  double total = 0.0;
  for (Index e = 0; e < model.size(); ++e) {
    const Matrix ec = model.elements[e] * c;
    for (Index r = 0; r < m_r; ++r) {
      const cplx a = r < alpha.value.rows() ? alpha.value(r, e) : cplx(0.0);
      total += (rec.block(r) * ec - a * target.L).squaredNorm();
    }
  }
  for (Index r = m_r; r < alpha.value.rows(); ++r)
    total += alpha.value.row(r).squaredNorm() * target.L.squaredNorm();
  return total;
}

Matrix clip_singular_values(const Matrix& c) {
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues().cwiseMin(1.0);
  return svd.matrixU() * s.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
}

namespace {

// U V^dag from the SVD of k; missing left singular vectors are completed
// deterministically when rank(k) < cols.
Matrix isometric_polar(const Matrix& k, bool& degenerate) {
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index rank = numerical_rank(svd.singularValues(), 1e-12);
  degenerate = rank < k.cols();
  Matrix u = svd.matrixU();
  if (degenerate) u = complete_columns(u, rank);
  return u * svd.matrixV().adjoint();
}

}  // namespace

EncodingDesign optimal_encoding(const Recovery& rec, const AlphaMatrix& alpha,
                                const ErrorModel& model, const TargetGate& target,
                                int pgd_max_iters, double pgd_tol) {
  target.validate(1e-10);
  const Index n_s = target.L.rows();
  if (rec.n_s != n_s) throw InputError("recovery block size must equal n_S");
  if (model.dim % n_s != 0) throw InputError("n_S must divide n_C");
  const Matrix k = encoding_target(rec, alpha, model, target);

  EncodingDesign out;
  const Index n_c = model.dim;
  const bool tp = model.is_trace_preserving(1e-10) &&
                  (rec.R.adjoint() * rec.R - Matrix::Identity(n_c, n_c)).norm() <= 1e-10;
  if (tp) {
    // d_ind(C) = ||C - K||^2 - ||K||^2 + ||alpha||^2 ||L||^2
    out.relaxed = clip_singular_values(k);
  } else {
    out.closed_form = false;
    Matrix p = Matrix::Zero(n_c, n_c);
    const Matrix rr = rec.R.adjoint() * rec.R;
    for (const auto& e : model.elements) p.noalias() += e.adjoint() * rr * e;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(p), Eigen::EigenvaluesOnly);
    const double step = 0.5 / std::max(eig.eigenvalues().maxCoeff(), 1e-300);
    Matrix c = clip_singular_values(k);
    for (int it = 0; it < pgd_max_iters; ++it) {
      const Matrix next = clip_singular_values(c - step * 2.0 * (p * c - k));
      const double delta = (next - c).norm();
      c = next;
      out.iterations = it + 1;
      if (delta <= pgd_tol) break;
    }
    out.relaxed = c;
  }
  // No phase normalization here: with alpha fixed, d_ind is not invariant
  // under per-column phases of C.
  Matrix rounded = isometric_polar(out.relaxed, out.degenerate);
  out.rounded = Encoding::from_matrix(std::move(rounded), "optimized");
  out.relaxed_objective = encoding_objective(out.relaxed, rec, alpha, model, target);
  out.rounded_objective = encoding_objective(out.rounded.C, rec, alpha, model, target);
  return out;
}

BiconvexResult biconvex_iterate(const ErrorModel& model, const Encoding& start,
                                const TargetGate& target, const BiconvexOptions& opts) {
  const auto t0 = Clock::now();
  start.validate();
  target.validate(1e-10);

  BiconvexResult best;
  best.fidelity = -std::numeric_limits<double>::infinity();
  SolveReport rep;

  auto consider = [&](const Encoding& c, const RecoveryDesign& d, const GammaMatrix& g, double f) {
    if (f > best.fidelity) {
      best.code = c;
      best.recovery = d.recovery;
      best.alpha = d.alpha;
      best.gamma = g;
      best.fidelity = f;
    }
  };

  Encoding code = start;
  std::optional<GammaMatrix> gamma_prev;
  const GammaMatrix approx = gamma_approx(model);
  double f_prev = std::numeric_limits<double>::quiet_NaN();
  double d_prev = std::numeric_limits<double>::infinity();

  for (int round = 1; round <= opts.max_rounds; ++round) {
    GammaMatrix gamma = approx;
    if (opts.step == GammaStep::exact) {
      // Warm start from the better of the approximation and the last gamma so
      // the gamma-step never loses ground.
      std::optional<GammaMatrix> warm;
      if (gamma_prev &&
          trace_sqrt_value(*gamma_prev, model, code) > trace_sqrt_value(approx, model, code))
        warm = gamma_prev;
      auto [g, r] = optimal_gamma(model, code, target, opts.gamma, warm);
      gamma = std::move(g);
      rep.iterations += r.iterations;
      rep.gap = r.gap;
    }
    gamma_prev = gamma;

    const RecoveryDesign design = recovery_from_gamma(model, code, gamma, target);
    const double d_rec = indirect_distance(design.recovery, design.alpha, model, code, target);
    consider(code, design, gamma, average_fidelity(design.recovery, model, code, target));

    const EncodingDesign enc = optimal_encoding(design.recovery, design.alpha, model, target);
    rep.degenerate = rep.degenerate || enc.degenerate;
    code = enc.rounded;
    const double d_enc = indirect_distance(design.recovery, design.alpha, model, code, target);
    const double f = average_fidelity(design.recovery, model, code, target);
    consider(code, design, gamma, f);

    if (d_rec > d_prev + opts.monotone_slack || d_enc > d_rec + opts.monotone_slack)
      rep.monotone = false;
    rep.d_ind.push_back(d_rec);
    rep.d_ind.push_back(d_enc);
    rep.objective.push_back(f);
    rep.rounds = round;
    d_prev = d_enc;

    if (std::isfinite(f_prev) && std::abs(f - f_prev) <= opts.rel_tol * std::max(std::abs(f), 1e-300)) {
      rep.converged = true;
      break;
    }
    f_prev = f;
  }
  rep.wall = Clock::now() - t0;
  best.report = std::move(rep);
  return best;
}

ErrorModel compress_model(const ErrorModel& model, double rel_tol) {
  model.validate();
  const Index n2 = model.dim * model.dim;
  Matrix a(n2, model.size());
  for (Index e = 0; e < model.size(); ++e)
    a.col(e) = Eigen::Map<const Vector>(model.elements[e].data(), n2);
  const Matrix gram = linalg::hermitian_part(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Index m = model.size();
  const double lmax = eig.eigenvalues()(m - 1);

  ErrorModel out;
  out.n_qubits = model.n_qubits;
  out.dim = model.dim;
  out.meta = model.meta;
  for (Index k = m - 1; k >= 0; --k) {
    if (eig.eigenvalues()(k) <= rel_tol * lmax) break;
    Matrix vcol = eig.eigenvectors().col(k);
    linalg::fix_column_phases(vcol);
    Matrix el = Matrix::Zero(model.dim, model.dim);
    for (Index e = 0; e < m; ++e)
      if (vcol(e, 0) != cplx(0.0)) el += vcol(e, 0) * model.elements[e];
    out.elements.push_back(std::move(el));
    out.labels.push_back("K" + std::to_string(out.elements.size() - 1));
  }
  return out;
}

}  // namespace qecopt
