#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace qecopt;

namespace {

const TargetGate kId = TargetGate::identity(2);

ErrorModel identity_channel(int n) {
  ErrorModel m;
  m.n_qubits = n;
  m.dim = Index{1} << n;
  m.elements = {Matrix::Identity(m.dim, m.dim)};
  m.labels = {"I"};
  return m;
}

// Minimizer of d_ind over R for fixed alpha, built directly from a test-side SVD.
Matrix best_recovery_oracle(const Matrix& mm) {
  Eigen::JacobiSVD<Matrix> svd(mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index n = mm.rows();
  return svd.matrixV().leftCols(n) * svd.matrixU().adjoint();
}

}  // namespace

TEST(TraceSqrt, IdentityChannelValue) {
  std::mt19937_64 rng(1);
  const Encoding c = oracle::random_code(16, 2, rng);
  EXPECT_NEAR(trace_sqrt_value(GammaMatrix{Matrix::Ones(1, 1)}, identity_channel(4), c), 2.0, 1e-12);
}

TEST(TraceSqrt, ValueMatchesSingularValueOracle) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) {
    const ErrorModel m = oracle::random_tp_model(8, 4, rng);
    const Encoding c = oracle::random_code(8, 2, rng);
    const GammaMatrix g = oracle::random_gamma(4, rng);
    EXPECT_NEAR(trace_sqrt_value(g, m, c), oracle::trace_sqrt_svd(g, m, c), 1e-12);
  }
}

TEST(TraceSqrt, GradientMatchesFiniteDifferencesOnComplexModels) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 6; ++k) {
    const ErrorModel m = k % 2 ? oracle::random_tp_model(8, 3, rng)
                               : random_unitary_model(3, 2, 0.2, UnitaryMode::independent, 30 + k);
    const Encoding c = oracle::random_code(8, 2, rng);
    const GammaMatrix g = oracle::random_gamma(m.size(), rng);
    const TraceSqrt ts = trace_sqrt_value_grad(g, m, c);
    EXPECT_LE((ts.grad - ts.grad.adjoint()).norm(), 1e-12);
    for (int d = 0; d < 10; ++d) {
      const Matrix dir = oracle::random_direction(m.size(), rng);
      const double h = 1e-5;
      const double fd = (trace_sqrt_value(GammaMatrix{g.value + h * dir}, m, c) -
                         trace_sqrt_value(GammaMatrix{g.value - h * dir}, m, c)) /
                        (2 * h);
      const double an = (ts.grad * dir).trace().real();
      EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(std::abs(an), 1e-3)) << k << " " << d;
    }
  }
}

TEST(TraceSqrt, MidpointConcavity) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    const ErrorModel m = oracle::random_tp_model(8, 5, rng);
    const Encoding c = oracle::random_code(8, 2, rng);
    const GammaMatrix a = oracle::random_gamma(5, rng), b = oracle::random_gamma(5, rng);
    const double mid = trace_sqrt_value(GammaMatrix{0.5 * (a.value + b.value)}, m, c);
    EXPECT_GE(mid, 0.5 * (trace_sqrt_value(a, m, c) + trace_sqrt_value(b, m, c)) - 1e-10);
  }
}

TEST(TraceSqrt, ClosedFormAtTinyEigenvalues) {
  // Weight-1 bit flips move the 513 codespace to orthogonal syndrome spaces:
  // B^dag B = diag(w) x I with w_i = ||E_i||^2 / n_C, so for diagonal gamma
  // Tr sqrt(X) = 2 sum sqrt(w_i mu_i) and G_ii = sqrt(w_i / mu_i).
  const ErrorModel m = bitflip_model(5, 1, 0.3);
  const Encoding c = code_513();
  const Eigen::VectorXd w = gamma_approx(m).value.diagonal().real();
  for (double eps : {1e-6, 1e-10, 1e-14}) {
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(6, eps);
    mu(0) = 1.0 - 5 * eps;
    const GammaMatrix g{mu.cast<cplx>().asDiagonal()};
    const double expected = 2.0 * w.cwiseProduct(mu).cwiseSqrt().sum();
    EXPECT_NEAR(trace_sqrt_value(g, m, c), expected, 1e-13) << eps;
    const TraceSqrt ts = trace_sqrt_value_grad(g, m, c);
    EXPECT_NEAR(ts.value, expected, 1e-13) << eps;
    for (Index i = 0; i < 6; ++i)
      EXPECT_NEAR(ts.grad(i, i).real() / std::sqrt(w(i) / mu(i)), 1.0, 1e-8) << eps << " " << i;
  }
}

TEST(OptimalGamma, CertifiesDegenerateCollectiveFixtures) {
  const Encoding c = code_dfs4();
  for (std::uint64_t seed : {3u, 4u, 5u})
    for (double p : {0.01, 0.15, 0.5}) {
      const ErrorModel m = random_unitary_model(4, 2, p, UnitaryMode::collective, seed);
      const auto [g, rep] = optimal_gamma(m, c, kId);
      EXPECT_TRUE(rep.converged) << seed << " " << p;
      EXPECT_LE(rep.gap, 1e-7) << seed << " " << p;
      EXPECT_GE(trace_sqrt_value(g, m, c), trace_sqrt_value(gamma_approx(m), m, c) - 1e-12);
    }
}

TEST(OptimalGamma, SingletonSimplex) {
  std::mt19937_64 rng(5);
  const auto [g, rep] = optimal_gamma(identity_channel(3), oracle::random_code(8, 2, rng), kId);
  EXPECT_NEAR(std::abs(g.value(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_LE(rep.gap, 1e-15);
  EXPECT_TRUE(rep.converged);
}

TEST(OptimalGamma, CertificatesAndDominance) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 6; ++k) {
    const ErrorModel m = k < 3 ? oracle::random_tp_model(8, 4, rng)
                               : random_unitary_model(3, 2, 0.1 * k, UnitaryMode::independent, k);
    const Encoding c = oracle::random_code(8, 2, rng);
    const auto [g, rep] = optimal_gamma(m, c, kId);
    EXPECT_NO_THROW(g.validate());
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.gap, 1e-7);
    for (std::size_t i = 1; i < rep.objective.size(); ++i)
      EXPECT_GE(rep.objective[i], rep.objective[i - 1] - 1e-12);
    const double best = trace_sqrt_value(g, m, c);
    EXPECT_GE(best, trace_sqrt_value(gamma_approx(m), m, c) - 1e-9);
    // The gap bounds the suboptimality against random feasible points.
    for (int t = 0; t < 20; ++t) EXPECT_LE(trace_sqrt_value(oracle::random_gamma(m.size(), rng), m, c), best + rep.gap + 1e-12);
  }
}

TEST(GammaApprox, UnitTraceDiagonal) {
  std::mt19937_64 rng(7);
  const ErrorModel m = oracle::random_tp_model(8, 5, rng);
  const GammaMatrix g = gamma_approx(m);
  EXPECT_NEAR(g.value.trace().real(), 1.0, 1e-12);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(g.value(i, i).real(), m.elements[i].squaredNorm() / 8.0, 1e-15);
  const GammaMatrix b = gamma_approx(bitflip_model(5, 3, 0.3));
  const auto q = pattern_probabilities(5, 3, 0.3);
  for (Index i = 0; i < 26; ++i) EXPECT_NEAR(b.value(i, i).real(), q[i], 1e-15);
}

TEST(RecoveryFromGamma, ShapesFollowAncillaCount) {
  const Encoding c = code_513();
  const ErrorModel m2 = bitflip_model(5, 2, 0.1), m3 = bitflip_model(5, 3, 0.1);
  const RecoveryDesign d2 = recovery_from_gamma(m2, c, gamma_approx(m2), kId);
  EXPECT_EQ(d2.recovery.R.rows(), 32);
  EXPECT_EQ(d2.recovery.n_ra, 1);
  EXPECT_LE((d2.recovery.R * d2.recovery.R.adjoint() - Matrix::Identity(32, 32)).norm(), 1e-10);
  const RecoveryDesign d3 = recovery_from_gamma(m3, c, gamma_approx(m3), kId);
  EXPECT_EQ(d3.recovery.R.rows(), 64);
  EXPECT_EQ(d3.recovery.R.cols(), 32);
  EXPECT_EQ(d3.recovery.n_ra, 2);
  EXPECT_EQ(d3.alpha.value.rows(), 32);
  EXPECT_EQ(d3.alpha.value.bottomRows(6).norm(), 0.0);
  EXPECT_NO_THROW(d3.recovery.validate());
  EXPECT_EQ(recovery_ancilla_dim(16, 16), 1);
  EXPECT_EQ(recovery_ancilla_dim(16, 26), 2);
  EXPECT_EQ(recovery_ancilla_dim(8, 11), 2);
}

TEST(RecoveryFromGamma, BeatsRandomIsometriesAndAttainsTraceSqrt) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const ErrorModel m = oracle::random_tp_model(8, 3, rng);
    const Encoding c = oracle::random_code(8, 2, rng);
    const GammaMatrix g = oracle::random_gamma(3, rng);
    const RecoveryDesign d = recovery_from_gamma(m, c, g, kId);
    const Matrix mm = build_M(m, d.alpha, c, kId);
    const double got = (d.recovery.R * mm).trace().real();
    EXPECT_NEAR(got, oracle::trace_sqrt_svd(g, m, c), 1e-10);
    EXPECT_NEAR(d.achieved, got, 1e-12);
    for (int t = 0; t < 200; ++t) {
      const Matrix r = oracle::random_isometry_mgs(d.recovery.R.rows(), 8, rng);
      EXPECT_LT((r * mm).trace().real(), got);
    }
    // Minimizing d_ind over R with everything else fixed.
    const double dmin = indirect_distance(d.recovery, d.alpha, m, c, kId);
    EXPECT_NEAR(dmin, 2.0 + 2.0 - 2.0 * trace_sqrt_value(g, m, c), 1e-9);
  }
}

TEST(RecoveryFromGamma, RankDeficientGammaStillGivesIsometry) {
  std::mt19937_64 rng(9);
  const ErrorModel m = oracle::random_tp_model(8, 4, rng);
  const Encoding c = oracle::random_code(8, 2, rng);
  Matrix v = oracle::random_complex(4, 1, rng);
  v /= v.norm();
  const RecoveryDesign d = recovery_from_gamma(m, c, GammaMatrix{v * v.adjoint()}, kId);
  EXPECT_NO_THROW(d.recovery.validate());
}

TEST(RecoveryFromGamma, UnitaryFreedomOfAlpha) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 5; ++k) {
    const ErrorModel m = oracle::random_tp_model(8, 4, rng);
    const Encoding c = oracle::random_code(8, 2, rng);
    const RecoveryDesign d = recovery_from_gamma(m, c, oracle::random_gamma(4, rng), kId);
    const double base = indirect_distance(d.recovery, d.alpha, m, c, kId);
    const Index rows = d.alpha.value.rows();
    const AlphaMatrix rotated{oracle::random_isometry_mgs(rows, rows, rng) * d.alpha.value};
    Recovery r2 = d.recovery;
    r2.R = best_recovery_oracle(build_M(m, rotated, c, kId));
    EXPECT_NEAR(indirect_distance(r2, rotated, m, c, kId), base, 1e-10);
  }
}

TEST(OptimalEncoding, ClosedFormMatchesProjectedGradientOracle) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const ErrorModel m = oracle::random_tp_model(8, 3, rng);
    const Encoding c0 = oracle::random_code(8, 2, rng);
    const RecoveryDesign d = recovery_from_gamma(m, c0, oracle::random_gamma(3, rng), kId);
    const EncodingDesign e = optimal_encoding(d.recovery, d.alpha, m, kId);
    EXPECT_TRUE(e.closed_form);
    const double ref = oracle::pgd_encoding_oracle(d.recovery, d.alpha, m, kId, c0.C);
    EXPECT_NEAR(e.relaxed_objective, ref, 1e-8);
    EXPECT_NEAR(encoding_objective(e.relaxed, d.recovery, d.alpha, m, kId), e.relaxed_objective, 1e-12);
    EXPECT_LE((e.rounded.C.adjoint() * e.rounded.C - Matrix::Identity(2, 2)).norm(), 1e-10);
    EXPECT_GE(e.rounded_objective, e.relaxed_objective - 1e-12);
    EXPECT_LE(e.rounded_objective, encoding_objective(c0.C, d.recovery, d.alpha, m, kId) + 1e-12);
  }
}

TEST(OptimalEncoding, FallbackForNonTracePreservingModels) {
  std::mt19937_64 rng(12);
  ErrorModel m = oracle::random_tp_model(8, 3, rng);
  m.elements[1] *= 0.5;
  const Encoding c0 = oracle::random_code(8, 2, rng);
  const RecoveryDesign d = recovery_from_gamma(m, c0, oracle::random_gamma(3, rng), kId);
  const EncodingDesign e = optimal_encoding(d.recovery, d.alpha, m, kId);
  EXPECT_FALSE(e.closed_form);
  EXPECT_NEAR(e.relaxed_objective, oracle::pgd_encoding_oracle(d.recovery, d.alpha, m, kId, c0.C, 20000),
              1e-8);
  EXPECT_LE((e.rounded.C.adjoint() * e.rounded.C - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(OptimalEncoding, IdentityChannelReturnsCodespace) {
  std::mt19937_64 rng(13);
  const Encoding c0 = oracle::random_code(8, 2, rng);
  const ErrorModel id = identity_channel(3);
  AlphaMatrix a{Matrix::Zero(4, 1)};
  a.value(0, 0) = 1.0;
  const EncodingDesign e = optimal_encoding(decode_recovery(c0), a, id, kId);
  EXPECT_LE((e.rounded.projector() - c0.projector()).norm(), 1e-10);
  EXPECT_FALSE(e.degenerate);
}

TEST(OptimalEncoding, DegenerateTargetIsFlagged) {
  std::mt19937_64 rng(14);
  const ErrorModel m = oracle::random_tp_model(8, 2, rng);
  AlphaMatrix zero{Matrix::Zero(4, 2)};
  const EncodingDesign e = optimal_encoding(decode_recovery(oracle::random_code(8, 2, rng)), zero, m, kId);
  EXPECT_TRUE(e.degenerate);
  EXPECT_LE((e.rounded.C.adjoint() * e.rounded.C - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(OptimalEncoding, PerfectCorrectionFixedPoint) {
  const Encoding c = code_513();
  const Recovery r = standard_recovery_513();
  const ErrorModel m = bitflip_model(5, 1, 0.2);
  const EncodingDesign e = optimal_encoding(r, induced_alpha(r, m, c, kId), m, kId);
  EXPECT_LE((e.rounded.projector() - c.projector()).norm(), 1e-8);
}

TEST(ClipSingularValues, ProjectsOntoUnitBall) {
  std::mt19937_64 rng(15);
  const Matrix a = 3.0 * oracle::random_complex(8, 2, rng);
  const Matrix p = clip_singular_values(a);
  EXPECT_LE((p - oracle::clip_oracle(a)).norm(), 1e-12);
  Eigen::JacobiSVD<Matrix> svd(p);
  EXPECT_LE(svd.singularValues()(0), 1.0 + 1e-12);
}

TEST(Biconvex, WeightOneKeepsThe513Codespace) {
  const ErrorModel m = bitflip_model(5, 1, 0.2);
  for (GammaStep step : {GammaStep::approx, GammaStep::exact}) {
    BiconvexOptions bo;
    bo.step = step;
    const BiconvexResult res = biconvex_iterate(m, code_513(), kId, bo);
    EXPECT_NEAR(res.fidelity, 1.0, 1e-10);
    EXPECT_LE((res.code.projector() - code_513().projector()).norm(), 1e-8);
    EXPECT_TRUE(res.report.monotone);
  }
}

TEST(Biconvex, IdentityChannelIsPerfectAfterOneRound) {
  std::mt19937_64 rng(16);
  const BiconvexResult res = biconvex_iterate(identity_channel(3), oracle::random_code(8, 2, rng), kId);
  EXPECT_NEAR(res.fidelity, 1.0, 1e-12);
  EXPECT_NEAR(res.report.objective.front(), 1.0, 1e-12);
}

TEST(Biconvex, IteratedDominatesRecoveryOnlyDesigns) {
  const Encoding c = code_513();
  for (std::uint64_t seed : {1, 2, 3}) {
    const ErrorModel m = random_unitary_model(5, 2, 0.1, UnitaryMode::independent, seed);
    const double f_std = average_fidelity(standard_recovery_513(), m, c, kId);
    const GammaMatrix g = optimal_gamma(m, c, kId).first;
    const double f_opt = average_fidelity(recovery_from_gamma(m, c, g, kId).recovery, m, c, kId);
    const BiconvexResult res = biconvex_iterate(m, c, kId);
    EXPECT_GE(f_opt, f_std) << seed;
    EXPECT_GT(res.fidelity, f_opt) << seed;
    EXPECT_TRUE(res.report.monotone);
    for (std::size_t i = 1; i < res.report.d_ind.size(); ++i)
      EXPECT_LE(res.report.d_ind[i], res.report.d_ind[i - 1] + 1e-9);
    EXPECT_NEAR(res.fidelity, average_fidelity(res.recovery, m, res.code, kId), 1e-12);
  }
}
