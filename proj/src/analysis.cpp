#include "telsim/analysis.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "telsim/random.hpp"

namespace telsim {

MatrixAction channel_action(const KrausChannel& c) {
  return [c](const Matrix& m) { return apply_channel_matrix(c, m); };
}

MatrixAction compose_actions(MatrixAction first, MatrixAction then) {
  return [first = std::move(first), then = std::move(then)](const Matrix& m) {
    return then(first(m));
  };
}

MatrixAction linear_action_from_pure(std::function<Matrix(const Vector&)> pure_action,
                                     int dim) {
  // Probe the map on basis states and the two superpositions per ordered
  // pair; a matrix unit |n><n'| is the polarization combination
  //   u u' + i v v' - (1+i)/2 (|n><n| + |n'><n'|),
  // u = (|n>+|n'>)/sqrt(2), v = (|n>+i|n'>)/sqrt(2).
  struct Table {
    std::vector<Matrix> unit_out;  // dim*dim entries, row-major (n, n')
  };
  auto table = std::make_shared<Table>();
  table->unit_out.resize(static_cast<std::size_t>(dim) * dim);

  std::vector<Matrix> diag_out(static_cast<std::size_t>(dim));
  for (int n = 0; n < dim; ++n) {
    Vector e = Vector::Zero(dim);
    e(n) = 1.0;
    diag_out[static_cast<std::size_t>(n)] = pure_action(e);
    table->unit_out[static_cast<std::size_t>(n) * dim + n] = diag_out[static_cast<std::size_t>(n)];
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int n = 0; n < dim; ++n) {
    for (int np = 0; np < dim; ++np) {
      if (n == np) continue;
      Vector u = Vector::Zero(dim), v = Vector::Zero(dim);
      u(n) = inv_sqrt2;
      u(np) = inv_sqrt2;
      v(n) = inv_sqrt2;
      v(np) = cxd(0.0, 1.0) * inv_sqrt2;
      const Matrix out_u = pure_action(u);
      const Matrix out_v = pure_action(v);
      table->unit_out[static_cast<std::size_t>(n) * dim + np] =
          out_u + cxd(0.0, 1.0) * out_v -
          cxd(0.5, 0.5) * (diag_out[static_cast<std::size_t>(n)] + diag_out[static_cast<std::size_t>(np)]);
    }
  }

  return [table, dim](const Matrix& m) {
    if (m.rows() != dim || m.cols() != dim) {
      throw std::invalid_argument("linear action: dimension mismatch");
    }
    Matrix out = Matrix::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
      for (int np = 0; np < dim; ++np) {
        const cxd c = m(n, np);
        if (c != cxd(0.0, 0.0)) out += c * table->unit_out[static_cast<std::size_t>(n) * dim + np];
      }
    }
    return out;
  };
}

MatrixAction teleport_action(const KrausChannel& cr, const KrausChannel& cb,
                             const BellMeasurement& meas) {
  const int dim = meas.dim;
  auto pure = [cr, cb, meas, dim](const Vector& v) {
    const SimulationResult sim = enumerate_outcomes(
        PureState({dim}, v), cr, cb, meas, AcceptSet::all(dim));
    return sim.averaged_output.matrix();
  };
  return linear_action_from_pure(pure, dim);
}

McEstimate average_fidelity_mc(const MatrixAction& action, int dim, int samples,
                               std::uint64_t seed) {
  if (samples < 100) throw std::invalid_argument("average_fidelity_mc: samples must be >= 100");
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const PureState psi = haar_state(dim, rng);
    const Matrix out = action(psi.amplitudes() * psi.amplitudes().adjoint());
    const double f = (psi.amplitudes().adjoint() * out * psi.amplitudes())(0).real();
    sum += f;
    sum_sq += f * f;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, (sum_sq - samples * mean * mean) / (samples - 1));
  return {mean, std::sqrt(var / samples)};
}

double entanglement_fidelity(const MatrixAction& action, int dim) {
  // <E|(action (x) id)(|E><E|)|E> = (1/N^2) sum_{n,n'} <n|action(|n><n'|)|n'>.
  cxd sum = 0.0;
  Matrix unit = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    for (int np = 0; np < dim; ++np) {
      unit.setZero();
      unit(n, np) = 1.0;
      sum += action(unit)(n, np);
    }
  }
  return sum.real() / (static_cast<double>(dim) * dim);
}

double exact_average_fidelity(const MatrixAction& action, int dim) {
  double trace_sum = 0.0;
  Matrix unit = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    unit.setZero();
    unit(n, n) = 1.0;
    trace_sum += action(unit).trace().real();
  }
  const double fe = entanglement_fidelity(action, dim);
  const double n = dim;
  return (n * n * fe + trace_sum) / (n * (n + 1.0));
}

//---------------------------------------------------------------------------
// compare_teleport_vs_direct
//---------------------------------------------------------------------------

ComparisonReport compare_teleport_vs_direct(const std::vector<PureState>& inputs,
                                            const KrausChannel& cr, const KrausChannel& cb,
                                            const BellMeasurement& meas) {
  if (inputs.empty()) {
    throw std::invalid_argument("compare_teleport_vs_direct: needs at least one input");
  }
  const int dim = meas.dim;
  ComparisonReport report;

  const KrausChannel cr_t = transpose_channel(cr);
  report.transposed_channel_trace_preserving = !cr_t.flagged_non_trace_preserving;

  const MatrixAction direct_plain =
      compose_actions(channel_action(cr_t), channel_action(cb));
  const MatrixAction direct_nontransposed =
      compose_actions(channel_action(cr), channel_action(cb));

  // m-matched direct side: conjugated transposed-R then conjugated-B,
  // mixed over m with weight chi(m)/N^2 (the sequential-error reading).
  std::vector<MatrixAction> per_m_direct;
  std::vector<double> per_m_weight;
  per_m_direct.reserve(meas.outcomes.size());
  for (const auto& o : meas.outcomes) {
    per_m_direct.push_back(
        compose_actions(channel_action(conjugate_channel(cr_t, o.correction)),
                        channel_action(conjugate_channel(cb, o.correction))));
    per_m_weight.push_back(o.chi / (static_cast<double>(dim) * dim));
  }
  MatrixAction direct_matched = [per_m_direct, per_m_weight, dim](const Matrix& m) {
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < per_m_direct.size(); ++i) {
      out += per_m_weight[i] * per_m_direct[i](m);
    }
    return out;
  };

  const MatrixAction teleport = teleport_action(cr, cb, meas);

  report.entanglement_fidelity_teleport = entanglement_fidelity(teleport, dim);
  report.entanglement_fidelity_direct = entanglement_fidelity(direct_plain, dim);
  report.avg_fidelity_teleport = exact_average_fidelity(teleport, dim);
  report.avg_fidelity_direct = exact_average_fidelity(direct_plain, dim);

  std::map<OutcomeLabel, double> per_m_sum;
  std::map<OutcomeLabel, int> per_m_count;

  for (const auto& psi : inputs) {
    if (psi.total_dim() != dim) {
      throw std::invalid_argument("compare_teleport_vs_direct: input dimension mismatch");
    }
    const Matrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
    const SimulationResult sim =
        enumerate_outcomes(psi, cr, cb, meas, AcceptSet::all(dim));

    const double f_tel = fidelity(psi, sim.averaged_output);
    auto probe = [&](const MatrixAction& a) {
      return (psi.amplitudes().adjoint() * a(rho) * psi.amplitudes())(0).real();
    };
    const double f_matched = probe(direct_matched);
    const double f_plain = probe(direct_plain);
    const double f_nont = probe(direct_nontransposed);

    report.input_fidelity_teleport.push_back(f_tel);
    report.input_fidelity_direct_matched.push_back(f_matched);
    report.input_fidelity_direct_plain.push_back(f_plain);
    report.input_fidelity_direct_nontransposed.push_back(f_nont);
    report.max_matched_gap = std::max(report.max_matched_gap, std::abs(f_tel - f_matched));
    report.m_blind_gap = std::max(report.m_blind_gap, std::abs(f_tel - f_plain));
    report.transposition_gap =
        std::max(report.transposition_gap, std::abs(f_plain - f_nont));

    for (const auto& [m, marginal] : sim.per_m_marginals) {
      if (marginal.prob <= null_branch_threshold) continue;
      per_m_sum[m] += fidelity(psi, marginal.state);
      per_m_count[m] += 1;
    }
  }
  for (const auto& [m, sum] : per_m_sum) {
    report.per_m_fidelity[m] = sum / per_m_count[m];
  }

  const bool channel_level_equal =
      std::abs(report.avg_fidelity_teleport - report.avg_fidelity_direct) < report.tol &&
      std::abs(report.entanglement_fidelity_teleport - report.entanglement_fidelity_direct) <
          report.tol &&
      report.max_matched_gap < report.tol;
  if (channel_level_equal) {
    report.verdict = CompareVerdict::equal_within_tol;
  } else if (report.avg_fidelity_teleport < report.avg_fidelity_direct - report.tol) {
    report.verdict = CompareVerdict::teleport_noisier_without_m;
  } else {
    report.verdict = CompareVerdict::mismatch;
  }
  return report;
}

ComparisonReport compare_teleport_vs_direct(int haar_samples, std::uint64_t seed,
                                            const KrausChannel& cr, const KrausChannel& cb,
                                            const BellMeasurement& meas) {
  if (haar_samples < 1) {
    throw std::invalid_argument("compare_teleport_vs_direct: haar_samples must be >= 1");
  }
  Rng rng(seed);
  std::vector<PureState> inputs;
  inputs.reserve(static_cast<std::size_t>(haar_samples));
  for (int i = 0; i < haar_samples; ++i) inputs.push_back(haar_state(meas.dim, rng));
  return compare_teleport_vs_direct(inputs, cr, cb, meas);
}

//---------------------------------------------------------------------------
// Angular momentum
//---------------------------------------------------------------------------

AngularMomentumReport angular_momentum_transpose_report(int two_j) {
  if (two_j < 1) {
    throw std::invalid_argument("angular_momentum_transpose_report: 2j must be >= 1");
  }
  const int dim = two_j + 1;
  const double j = two_j / 2.0;

  // Basis |j, m> ordered m = j, j-1, ..., -j; ladder matrix elements
  // <j,m+1| l_+ |j,m> = sqrt(j(j+1) - m(m+1)).
  Matrix lp = Matrix::Zero(dim, dim);
  Matrix lz = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double mval = j - k;
    lz(k, k) = mval;
    if (k > 0) lp(k - 1, k) = std::sqrt(j * (j + 1.0) - mval * (mval + 1.0));
  }
  const Matrix lm = lp.adjoint();

  AngularMomentumReport report;
  report.two_j = two_j;
  report.lx = Operator(Matrix(0.5 * (lp + lm)));
  report.ly = Operator(Matrix(cxd(0.0, -0.5) * (lp - lm)));
  report.lz = Operator(std::move(lz));
  report.norm_lx_transpose_minus_lx =
      max_abs(Matrix(report.lx.matrix().transpose() - report.lx.matrix()));
  report.norm_ly_transpose_plus_ly =
      max_abs(Matrix(report.ly.matrix().transpose() + report.ly.matrix()));
  report.norm_lz_transpose_minus_lz =
      max_abs(Matrix(report.lz.matrix().transpose() - report.lz.matrix()));
  return report;
}

//---------------------------------------------------------------------------
// Homogeneity
//---------------------------------------------------------------------------

ChannelHomogeneity homogeneity_report(const KrausChannel& c, const BellMeasurement& meas) {
  if (c.dim != meas.dim) {
    throw std::invalid_argument("homogeneity_report: dimension mismatch");
  }
  std::vector<Operator> unitaries;
  unitaries.reserve(meas.outcomes.size());
  for (const auto& o : meas.outcomes) unitaries.push_back(o.correction);

  ChannelHomogeneity h;
  h.weyl = check_unitary_homogeneity(c, unitaries);
  h.transpose = check_transpose_homogeneity(c);
  h.covariant_under_weyl = h.weyl.covariant_under_weyl;
  h.transpose_homogeneous = h.transpose.transpose_homogeneous;
  h.predicts_m_independent_outputs = h.covariant_under_weyl && h.transpose_homogeneous;
  return h;
}

}  // namespace telsim
