#include "qecopt/channel_models.hpp"

#include <cmath>
#include <sstream>

namespace qecopt {

namespace {

void check_params(int n_qubits, int w, double p) {
  if (n_qubits < 1 || n_qubits > 12)
    throw InputError("n_qubits must be in [1, 12], got " + std::to_string(n_qubits));
  if (w < 0 || w > n_qubits)
    throw InputError("weight must be in [0, n_qubits], got " + std::to_string(w));
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("probability must be in [0, 1]");
}

std::string support_label(const Support& s) {
  if (s.empty()) return "I";
  std::ostringstream os;
  os << "{";
  for (std::size_t k = 0; k < s.size(); ++k) os << (k ? "," : "") << s[k];
  os << "}";
  return os.str();
}

void combinations(int n, int k, int start, Support& cur, std::vector<Support>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

double ErrorModel::trace_preservation_error() const {
  Matrix acc = Matrix::Zero(dim, dim);
  for (const auto& e : elements) acc.noalias() += e.adjoint() * e;
  acc -= Matrix::Identity(dim, dim);
  return acc.norm();
}

bool ErrorModel::is_trace_preserving(double tol) const {
  return trace_preservation_error() <= tol;
}

void ErrorModel::validate() const {
  if (elements.empty()) throw InputError("error model has no elements");
  if (dim < 1) throw InputError("error model has invalid dimension");
  for (const auto& e : elements)
    if (e.rows() != dim || e.cols() != dim)
      throw InputError("error model element is not dim x dim");
}

std::vector<Support> enumerate_supports(int n_qubits, int w) {
  if (n_qubits < 0 || w < 0 || w > n_qubits)
    throw InputError("enumerate_supports: need 0 <= w <= n_qubits");
  std::vector<Support> out;
  Support cur;
  for (int k = 0; k <= w; ++k) combinations(n_qubits, k, 0, cur, out);
  return out;
}

std::vector<double> pattern_probabilities(int n_qubits, int w, double p) {
  check_params(n_qubits, w, p);
  const auto supports = enumerate_supports(n_qubits, w);
  std::vector<double> q;
  q.reserve(supports.size());
  double z = 0.0;
  for (const auto& s : supports) {
    const int t = static_cast<int>(s.size());
    q.push_back(std::pow(p, t) * std::pow(1.0 - p, n_qubits - t));
    z += q.back();
  }
  // z > 0 unless p = 1 and w < n; then only patterns of full weight would
  // carry mass, none of which are enumerated.
  if (!(z > 0.0)) throw InputError("pattern probabilities vanish (p = 1 with w < n_qubits)");
  for (auto& v : q) v /= z;
  return q;
}

Matrix pattern_operator(int n_qubits, const Support& s, const Matrix& op) {
  const Matrix id = Matrix::Identity(2, 2);
  Matrix out = Matrix::Ones(1, 1);
  std::size_t k = 0;
  for (int q = 0; q < n_qubits; ++q) {
    const bool hit = k < s.size() && s[k] == q;
    out = linalg::kron(out, hit ? op : id);
    if (hit) ++k;
  }
  return out;
}

ErrorModel pattern_model(int n_qubits, int w, double p,
                         const std::function<Matrix(std::size_t, const Support&)>& op) {
  check_params(n_qubits, w, p);
  const auto supports = enumerate_supports(n_qubits, w);
  const auto probs = pattern_probabilities(n_qubits, w, p);

  ErrorModel m;
  m.n_qubits = n_qubits;
  m.dim = Index{1} << n_qubits;
  m.meta.family = "custom";
  m.meta.weight = w;
  m.meta.p = p;
  m.elements.reserve(supports.size());
  for (std::size_t i = 0; i < supports.size(); ++i) {
    const Matrix u = supports[i].empty() ? Matrix::Identity(2, 2) : op(i, supports[i]);
    if (u.rows() != 2 || u.cols() != 2) throw InputError("pattern operator must be 2x2");
    m.elements.push_back(std::sqrt(probs[i]) * pattern_operator(n_qubits, supports[i], u));
    m.labels.push_back(support_label(supports[i]));
  }
  return m;
}

ErrorModel bitflip_model(int n_qubits, int w, double p) {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  ErrorModel m = pattern_model(n_qubits, w, p, [&](std::size_t, const Support&) { return x; });
  m.meta.family = "bitflip";
  return m;
}

Matrix haar_unitary_2x2(std::mt19937_64& rng) { return linalg::haar_isometry(2, 2, rng); }

ErrorModel random_unitary_model(int n_qubits, int w, double p, UnitaryMode mode,
                                std::uint64_t seed) {
  check_params(n_qubits, w, p);
  std::mt19937_64 rng(seed);
  const auto supports = enumerate_supports(n_qubits, w);
  // Draw all unitaries up front so the sequence does not depend on p.
  std::vector<Matrix> unitaries;
  if (mode == UnitaryMode::collective) {
    unitaries.push_back(haar_unitary_2x2(rng));
  } else {
    for (const auto& s : supports)
      unitaries.push_back(s.empty() ? Matrix::Identity(2, 2) : haar_unitary_2x2(rng));
  }
  ErrorModel m = pattern_model(n_qubits, w, p, [&](std::size_t i, const Support&) {
    return mode == UnitaryMode::collective ? unitaries.front() : unitaries[i];
  });
  m.meta.family = "random_unitary";
  m.meta.seed = seed;
  return m;
}

ErrorModel pool_average(const std::vector<ErrorModel>& models) {
  if (models.empty()) throw InputError("pool_average: empty model list");
  const Index dim = models.front().dim;
  for (const auto& m : models) {
    m.validate();
    if (m.dim != dim) throw InputError("pool_average: models have different dimensions");
  }
  if (models.size() == 1) return models.front();

  const double scale = 1.0 / std::sqrt(static_cast<double>(models.size()));
  ErrorModel out;
  out.n_qubits = models.front().n_qubits;
  out.dim = dim;
  out.meta = models.front().meta;
  out.meta.family = "pooled";
  out.meta.pool_size = static_cast<int>(models.size());
  for (std::size_t b = 0; b < models.size(); ++b) {
    for (std::size_t e = 0; e < models[b].elements.size(); ++e) {
      out.elements.push_back(scale * models[b].elements[e]);
      const std::string lab = e < models[b].labels.size() ? models[b].labels[e] : "E";
      out.labels.push_back(std::to_string(b) + ":" + lab);
    }
  }
  return out;
}

}  // namespace qecopt
