#include <cmath>
#include <cstdio>
#include <random>

#include "qecopt/experiment.hpp"

namespace qecopt {

namespace {

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

CheckResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

}  // namespace

std::vector<CheckResult> verify_fixtures() {
  std::vector<CheckResult> out;
  const TargetGate id = TargetGate::identity(2);
  const Encoding c513 = code_513();
  const Encoding dfs = code_dfs4();
  const Recovery std513 = standard_recovery_513();

  {
    double worst = 0.0;
    for (int w = 0; w <= 5; ++w)
      for (double p : {0.0, 0.1, 0.5, 0.9})
        worst = std::max(worst, bitflip_model(5, w, p).trace_preservation_error());
    worst = std::max(worst, random_unitary_model(5, 2, 0.3, UnitaryMode::independent, 11)
                                .trace_preservation_error());
    out.push_back(check("models are trace preserving", worst <= 1e-10, "max error " + num(worst)));
  }
  {
    const double e1 = (c513.C.adjoint() * c513.C - Matrix::Identity(2, 2)).norm();
    const double e2 = (dfs.C.adjoint() * dfs.C - Matrix::Identity(2, 2)).norm();
    double stab = 0.0;
    for (const auto& g : stabilizers_513()) stab = std::max(stab, (pauli_string(g) * c513.C - c513.C).norm());
    out.push_back(check("codes are isometries fixed by their symmetries",
                        e1 <= 1e-12 && e2 <= 1e-12 && stab <= 1e-12,
                        "isometry " + num(std::max(e1, e2)) + ", stabilizer " + num(stab)));
  }
  {
    const double rr = (std513.R.adjoint() * std513.R - Matrix::Identity(32, 32)).norm();
    const double f = average_fidelity(std513, bitflip_model(5, 1, 0.2), c513, id);
    out.push_back(check("standard [5,1,3] recovery corrects weight-1 bit flips",
                        rr <= 1e-10 && std::abs(f - 1.0) <= 1e-10,
                        "R^dag R error " + num(rr) + ", 1 - f_avg " + num(1.0 - f)));
  }
  {
    double worst = 0.0;
    for (double p : {0.1, 0.5, 0.9}) {
      const ErrorModel m = bitflip_model(5, 2, p);
      const auto [g, rep] = optimal_gamma(m, c513, id);
      const Recovery r = recovery_from_gamma(m, c513, g, id).recovery;
      worst = std::max(worst, 1.0 - average_fidelity(r, m, c513, id));
    }
    out.push_back(check("optimized recovery is perfect on weight-2 bit flips", worst <= 1e-6,
                        "max infidelity " + num(worst)));
  }
  {
    std::mt19937_64 rng(5);
    const ErrorModel m = random_unitary_model(3, 2, 0.3, UnitaryMode::independent, 3);
    const Encoding c = random_isometry(8, 2, 4);
    Matrix a = linalg::haar_isometry(m.size(), m.size(), rng);
    const GammaMatrix g{Matrix(a * Matrix(Eigen::VectorXd::LinSpaced(m.size(), 1.0, 2.0)
                                              .cast<cplx>().asDiagonal()) * a.adjoint())};
    GammaMatrix gn{g.value / g.value.trace().real()};
    const RecoveryDesign d = recovery_from_gamma(m, c, gn, id);
    const double target = trace_sqrt_value(gn, m, c);
    out.push_back(check("SVD recovery attains Tr sqrt(E(gamma x CC^dag)E^dag)",
                        std::abs(d.achieved - target) <= 1e-10,
                        "difference " + num(d.achieved - target)));
  }
  {
    const ErrorModel m = bitflip_model(5, 1, 0.2);
    BiconvexOptions bo;
    const BiconvexResult res = biconvex_iterate(m, c513, id, bo);
    const double dp = (res.code.projector() - c513.projector()).norm();
    out.push_back(check("bi-convex iteration keeps the [5,1,3] codespace on weight-1 errors",
                        dp <= 1e-8 && std::abs(res.fidelity - 1.0) <= 1e-10,
                        "projector change " + num(dp)));
  }
  return out;
}

}  // namespace qecopt
