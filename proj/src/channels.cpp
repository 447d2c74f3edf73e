#include "telsim/channels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "telsim/teleport.hpp"

namespace telsim {

namespace {

const std::string kEmptyLabel;

Matrix completeness_sum(const KrausChannel& c) {
  Matrix sum = Matrix::Zero(c.dim, c.dim);
  for (const auto& f : c.kraus) sum += f.matrix().adjoint() * f.matrix();
  return sum;
}

}  // namespace

const std::string& KrausChannel::label(int x) const {
  if (x < 0 || x >= size()) throw std::out_of_range("KrausChannel::label");
  return labels.empty() ? kEmptyLabel : labels[static_cast<std::size_t>(x)];
}

ChannelValidation validate_channel(const KrausChannel& c) {
  if (c.dim < 1 || c.kraus.empty()) return {false, std::numeric_limits<double>::infinity()};
  for (const auto& f : c.kraus) {
    if (f.dim() != c.dim) return {false, std::numeric_limits<double>::infinity()};
  }
  const double dev =
      max_abs(Matrix(completeness_sum(c) - Matrix::Identity(c.dim, c.dim)));
  return {dev < tol_alg, dev};
}

Matrix apply_channel_matrix(const KrausChannel& c, const Matrix& m) {
  if (m.rows() != c.dim || m.cols() != c.dim) {
    throw std::invalid_argument("apply_channel: dimension mismatch");
  }
  Matrix out = Matrix::Zero(c.dim, c.dim);
  for (const auto& f : c.kraus) out += f.matrix() * m * f.matrix().adjoint();
  return out;
}

DensityMatrix apply_channel(const KrausChannel& c, const DensityMatrix& rho) {
  return DensityMatrix(rho.dims(), apply_channel_matrix(c, rho.matrix()));
}

KrausChannel transpose_channel(const KrausChannel& c) {
  KrausChannel t;
  t.dim = c.dim;
  t.labels = c.labels;
  t.kraus.reserve(c.kraus.size());
  for (const auto& f : c.kraus) t.kraus.push_back(transpose_in_basis(f));
  const ChannelValidation v = validate_channel(t);
  t.flagged_non_trace_preserving = !v.ok;
  t.completeness_deviation = v.deviation;
  return t;
}

KrausChannel conjugate_channel(const KrausChannel& c, const Operator& u) {
  if (u.dim() != c.dim) throw std::invalid_argument("conjugate_channel: dimension mismatch");
  KrausChannel out;
  out.dim = c.dim;
  out.labels = c.labels;
  out.kraus.reserve(c.kraus.size());
  const Matrix& um = u.matrix();
  for (const auto& f : c.kraus) {
    out.kraus.emplace_back(Matrix(um * f.matrix() * um.adjoint()));
  }
  out.flagged_non_trace_preserving = c.flagged_non_trace_preserving;
  out.completeness_deviation = c.completeness_deviation;
  return out;
}

//---------------------------------------------------------------------------
// Permutation/phase set matching
//---------------------------------------------------------------------------

namespace {

// Phase-aligned Frobenius distance between candidate and target, with the
// optimal global phase from the Hilbert-Schmidt inner product.
std::pair<double, cxd> aligned_distance(const Matrix& candidate, const Matrix& target) {
  const cxd inner = (target.adjoint() * candidate).trace();
  cxd phase{1.0, 0.0};
  if (std::abs(inner) > 1e-300) phase = inner / std::abs(inner);
  const double dist = (candidate - phase * target).norm();
  return {dist, phase};
}

// Greedy nearest-match of `sources` into `targets`, distances measured on
// Frobenius-normalized copies, then each match verified on the raw elements
// within tol_match. Returns witnesses on success.
bool match_sets(const std::vector<Matrix>& sources, const std::vector<Matrix>& targets,
                std::vector<MatchWitness>& witnesses, double& max_residual) {
  const int n = static_cast<int>(sources.size());
  if (static_cast<int>(targets.size()) != n) return false;

  std::vector<Matrix> sources_n(sources), targets_n(targets);
  for (auto& m : sources_n) {
    const double f = m.norm();
    if (f > 1e-300) m /= f;
  }
  for (auto& m : targets_n) {
    const double f = m.norm();
    if (f > 1e-300) m /= f;
  }

  std::vector<bool> used(n, false);
  witnesses.clear();
  witnesses.reserve(n);
  bool all_ok = true;

  for (int i = 0; i < n; ++i) {
    int best = -1, second = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    double second_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = aligned_distance(sources_n[i], targets_n[j]).first;
      if (d < best_dist) {
        second = best;
        second_dist = best_dist;
        best = j;
        best_dist = d;
      } else if (d < second_dist) {
        second = j;
        second_dist = d;
      }
    }
    MatchWitness w;
    w.source = i;
    w.matched = best;
    if (best < 0) {
      all_ok = false;
      witnesses.push_back(w);
      continue;
    }
    used[best] = true;
    w.ambiguous = second >= 0 && (second_dist - best_dist) < tol_match;

    // Verify on the raw, unnormalized elements.
    auto [raw_dist, phase] = aligned_distance(sources[i], targets[best]);
    w.phase = phase;
    w.residual = raw_dist;
    max_residual = std::max(max_residual, raw_dist);
    if (raw_dist >= tol_match) all_ok = false;
    witnesses.push_back(w);
  }
  return all_ok;
}

}  // namespace

HomogeneityReport check_unitary_homogeneity(const KrausChannel& c,
                                            const std::vector<Operator>& unitaries) {
  HomogeneityReport report;
  report.covariant_under_weyl = true;

  std::vector<Matrix> originals;
  originals.reserve(c.kraus.size());
  for (const auto& f : c.kraus) originals.push_back(f.matrix());

  for (const auto& u : unitaries) {
    if (u.dim() != c.dim) {
      throw std::invalid_argument("check_unitary_homogeneity: dimension mismatch");
    }
    if (!u.is_unitary()) {
      throw std::invalid_argument("check_unitary_homogeneity: non-unitary input");
    }
    std::vector<Matrix> conjugated;
    conjugated.reserve(originals.size());
    for (const auto& f : originals) {
      conjugated.push_back(u.matrix() * f * u.matrix().adjoint());
    }
    std::vector<MatchWitness> witnesses;
    const bool ok = match_sets(conjugated, originals, witnesses, report.residual);
    if (ok) {
      report.witnesses.push_back(std::move(witnesses));
    } else {
      report.covariant_under_weyl = false;
    }
  }
  return report;
}

HomogeneityReport check_transpose_homogeneity(const KrausChannel& c) {
  HomogeneityReport report;
  std::vector<Matrix> originals, transposed;
  originals.reserve(c.kraus.size());
  for (const auto& f : c.kraus) {
    originals.push_back(f.matrix());
    transposed.push_back(f.matrix().transpose());
  }
  std::vector<MatchWitness> witnesses;
  report.transpose_homogeneous = match_sets(transposed, originals, witnesses, report.residual);
  if (report.transpose_homogeneous) report.witnesses.push_back(std::move(witnesses));
  return report;
}

//---------------------------------------------------------------------------
// Builders
//---------------------------------------------------------------------------

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": parameter must lie in [0, 1]");
  }
}

std::string weyl_label(int a, int b) {
  return "X^" + std::to_string(a) + "Z^" + std::to_string(b);
}

}  // namespace

KrausChannel make_identity_channel(int dim) {
  if (dim < 1) throw std::invalid_argument("identity channel: dim must be >= 1");
  return {dim, {Operator::identity(dim)}, {"I"}};
}

KrausChannel make_dephasing_channel(int dim, double p) {
  check_probability(p, "dephasing");
  if (dim < 2) throw std::invalid_argument("dephasing: dim must be >= 2");
  KrausChannel c;
  c.dim = dim;
  c.kraus.push_back(Operator(Matrix(std::sqrt(1.0 - p) * Matrix::Identity(dim, dim))));
  c.kraus.push_back(Operator(Matrix(std::sqrt(p) * weyl_unitary(dim, 0, 1).matrix())));
  c.labels = {"I", "Z"};
  return c;
}

KrausChannel make_uniform_depolarizing_channel(int dim, double p) {
  check_probability(p, "uniform_depolarizing");
  if (dim < 2) throw std::invalid_argument("uniform_depolarizing: dim must be >= 2");
  const double n2 = static_cast<double>(dim) * dim;
  KrausChannel c;
  c.dim = dim;
  c.kraus.push_back(
      Operator(Matrix(std::sqrt(1.0 - p + p / n2) * Matrix::Identity(dim, dim))));
  c.labels.push_back("I");
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      if (a == 0 && b == 0) continue;
      c.kraus.push_back(
          Operator(Matrix(std::sqrt(p / n2) * weyl_unitary(dim, a, b).matrix())));
      c.labels.push_back(weyl_label(a, b));
    }
  }
  return c;
}

KrausChannel make_weyl_channel(int dim, std::vector<double> weights) {
  if (dim < 2) throw std::invalid_argument("weyl channel: dim must be >= 2");
  if (static_cast<int>(weights.size()) != dim * dim) {
    throw std::invalid_argument("weyl channel: needs dim^2 weights");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("weyl channel: weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("weyl channel: weights must sum to 1");
  }
  KrausChannel c;
  c.dim = dim;
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      const double w = weights[static_cast<std::size_t>(a) * dim + b];
      if (w == 0.0) continue;
      c.kraus.push_back(Operator(Matrix(std::sqrt(w) * weyl_unitary(dim, a, b).matrix())));
      c.labels.push_back(weyl_label(a, b));
    }
  }
  return c;
}

KrausChannel make_unitary_error_channel(const Operator& u, double p) {
  check_probability(p, "unitary_error");
  if (!u.is_unitary()) throw std::invalid_argument("unitary_error: operator is not unitary");
  KrausChannel c;
  c.dim = u.dim();
  c.kraus.push_back(Operator(Matrix(std::sqrt(1.0 - p) * Matrix::Identity(c.dim, c.dim))));
  c.kraus.push_back(Operator(Matrix(std::sqrt(p) * u.matrix())));
  c.labels = {"I", "U"};
  return c;
}

KrausChannel make_amplitude_damping_channel(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("amplitude_damping: gamma must lie in [0, 1]");
  }
  Matrix k0(2, 2), k1(2, 2);
  k0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - gamma);
  k1 << 0.0, std::sqrt(gamma), 0.0, 0.0;
  return {2, {Operator(std::move(k0)), Operator(std::move(k1))}, {"K0", "K1"}};
}

KrausChannel make_custom_channel(int dim, std::vector<Operator> kraus) {
  KrausChannel c;
  c.dim = dim;
  c.kraus = std::move(kraus);
  const ChannelValidation v = validate_channel(c);
  if (!v.ok) {
    throw std::invalid_argument("custom channel: Kraus completeness sum deviates by " +
                                std::to_string(v.deviation));
  }
  return c;
}

KrausChannel build_standard_channel(const ChannelSpec& spec, int dim) {
  switch (spec.kind) {
    case ChannelKind::identity:
      return make_identity_channel(dim);
    case ChannelKind::dephasing:
      return make_dephasing_channel(dim, spec.p);
    case ChannelKind::uniform_depolarizing:
      return make_uniform_depolarizing_channel(dim, spec.p);
    case ChannelKind::weyl:
      return make_weyl_channel(dim, spec.weights);
    case ChannelKind::unitary_error: {
      if (spec.unitary.rows() != dim || spec.unitary.cols() != dim) {
        throw std::invalid_argument("unitary_error: matrix does not match dim");
      }
      return make_unitary_error_channel(Operator(spec.unitary), spec.p);
    }
    case ChannelKind::amplitude_damping: {
      if (dim != 2) throw std::invalid_argument("amplitude_damping: only dim 2 is supported");
      return make_amplitude_damping_channel(spec.gamma);
    }
    case ChannelKind::custom: {
      std::vector<Operator> ops;
      ops.reserve(spec.kraus.size());
      for (const auto& m : spec.kraus) {
        if (m.rows() != dim || m.cols() != dim) {
          throw std::invalid_argument("custom channel: Kraus matrix does not match dim");
        }
        ops.emplace_back(m);
      }
      return make_custom_channel(dim, std::move(ops));
    }
  }
  throw std::invalid_argument("build_standard_channel: unknown kind");
}

}  // namespace telsim
