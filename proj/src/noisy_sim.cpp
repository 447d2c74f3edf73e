#include "telsim/noisy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "telsim/random.hpp"

namespace telsim {

namespace {

void check_sim_inputs(const PureState& psi, const KrausChannel& cr, const KrausChannel& cb,
                      const BellMeasurement& meas, const AcceptSet& accept) {
  const int dim = meas.dim;
  if (psi.total_dim() != dim || cr.dim != dim || cb.dim != dim) {
    throw std::invalid_argument("simulation: psi/channel/measurement dimension mismatch");
  }
  if (std::abs(psi.norm2() - 1.0) > tol_alg) {
    throw std::invalid_argument("simulation: psi must be normalized");
  }
  if (!validate_channel(cr).ok || !validate_channel(cb).ok) {
    throw std::invalid_argument("simulation: channel fails Kraus completeness");
  }
  if (accept.accepted.empty()) {
    throw std::invalid_argument("simulation: accept set must be non-empty");
  }
  for (const auto& m : accept.accepted) {
    if (!meas.has_outcome(m)) {
      throw std::invalid_argument("simulation: accept label not in measurement outcomes");
    }
  }
}

std::vector<OutcomeLabel> sorted_accept_labels(const AcceptSet& accept, int dim) {
  std::vector<OutcomeLabel> labels = accept.accepted;
  std::sort(labels.begin(), labels.end(),
            [dim](OutcomeLabel l, OutcomeLabel r) { return l.index(dim) < r.index(dim); });
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

// Unnormalized corrected branch amplitude on B for (m, x_r, x_b).
using BranchFn = std::function<Vector(OutcomeLabel, int, int)>;

// Shared aggregation: walks the (m, x_r, x_b) grid in lexicographic order,
// renormalizes by the acceptance probability, and assembles the record list
// and the averaged / per-m / pre-message density matrices.
SimulationResult aggregate_branches(const BranchFn& branch, const KrausChannel& cr,
                                    const KrausChannel& cb, const BellMeasurement& meas,
                                    const std::vector<OutcomeLabel>& labels) {
  const int dim = meas.dim;
  SimulationResult result;
  result.dim = dim;
  result.measurement = meas;

  struct RawBranch {
    OutcomeLabel m;
    int xr, xb;
    Vector amps;
    double raw_norm2;
  };
  std::vector<RawBranch> raw;
  raw.reserve(labels.size() * cr.kraus.size() * cb.kraus.size());

  double acceptance = 0.0;
  for (const auto& m : labels) {
    for (int xr = 0; xr < cr.size(); ++xr) {
      for (int xb = 0; xb < cb.size(); ++xb) {
        Vector v = branch(m, xr, xb);
        const double n2 = v.squaredNorm();
        acceptance += n2;
        raw.push_back({m, xr, xb, std::move(v), n2});
      }
    }
  }
  if (acceptance < min_acceptance_probability) {
    throw std::runtime_error("simulation: acceptance probability below 1e-12, post-selection impossible");
  }
  result.acceptance_probability = acceptance;

  Matrix averaged = Matrix::Zero(dim, dim);
  Matrix premessage = Matrix::Zero(dim, dim);
  std::map<OutcomeLabel, Matrix> per_m;
  std::map<OutcomeLabel, double> per_m_prob;
  for (const auto& m : labels) {
    per_m.emplace(m, Matrix::Zero(dim, dim));
    per_m_prob.emplace(m, 0.0);
  }

  for (auto& rb : raw) {
    OutcomeRecord rec;
    rec.m = rb.m;
    rec.xr = rb.xr;
    rec.xb = rb.xb;
    rec.raw_norm2 = rb.raw_norm2;
    rec.prob = rb.raw_norm2 / acceptance;
    if (rb.raw_norm2 <= null_branch_threshold) {
      rec.null_output = true;
    } else {
      rec.output = PureState({dim}, Vector(rb.amps / std::sqrt(rb.raw_norm2)));
      const Vector& out = rec.output.amplitudes();
      const Matrix proj = out * out.adjoint();
      averaged += rec.prob * proj;
      per_m[rb.m] += rec.prob * proj;
      per_m_prob[rb.m] += rec.prob;
      const Vector uncorrected =
          meas.outcome(rb.m).correction.matrix().adjoint() * out;
      premessage += rec.prob * (uncorrected * uncorrected.adjoint());
    }
    result.records.push_back(std::move(rec));
  }

  result.averaged_output = DensityMatrix({dim}, std::move(averaged));
  result.premessage_marginal = DensityMatrix({dim}, std::move(premessage));
  for (const auto& m : labels) {
    const double pm = per_m_prob[m];
    Matrix conditional = pm > null_branch_threshold ? Matrix(per_m[m] / pm)
                                                    : Matrix(Matrix::Zero(dim, dim));
    result.per_m_marginals.emplace(m, PerOutcomeMarginal{pm, DensityMatrix({dim}, std::move(conditional))});
  }
  return result;
}

}  // namespace

PureState noisy_initial_state(const PureState& psi, const Operator& fr, const Operator& fb) {
  const int dim = psi.total_dim();
  if (fr.dim() != dim || fb.dim() != dim) {
    throw std::invalid_argument("noisy_initial_state: dimension mismatch");
  }
  const Vector& a = psi.amplitudes();
  const Matrix& mr = fr.matrix();
  const Matrix& mb = fb.matrix();
  Vector v = Vector::Zero(static_cast<long>(dim) * dim * dim);
  const double pref = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int ia = 0; ia < dim; ++ia) {
    for (int ir = 0; ir < dim; ++ir) {
      for (int ib = 0; ib < dim; ++ib) {
        cxd sum = 0.0;
        for (int n = 0; n < dim; ++n) sum += mr(ir, n) * mb(ib, n);
        v((static_cast<long>(ia) * dim + ir) * dim + ib) = pref * a(ia) * sum;
      }
    }
  }
  return PureState({dim, dim, dim}, std::move(v));
}

std::pair<double, PureState> measure_and_correct(const PureState& state,
                                                 const BellMeasurement& meas,
                                                 OutcomeLabel m) {
  const int dim = meas.dim;
  if (state.dims() != std::vector<int>{dim, dim, dim}) {
    throw std::invalid_argument("measure_and_correct: state must be tripartite (N,N,N)");
  }
  const Vector p = bell_state(meas, m).amplitudes();
  const Vector& amps = state.amplitudes();
  Vector out = Vector::Zero(dim);
  for (int ar = 0; ar < dim * dim; ++ar) {
    const cxd w = std::conj(p(ar));
    if (w == cxd(0.0, 0.0)) continue;
    for (int ib = 0; ib < dim; ++ib) {
      out(ib) += w * amps(static_cast<long>(ar) * dim + ib);
    }
  }
  const double raw_norm2 = out.squaredNorm();
  if (raw_norm2 <= null_branch_threshold) {
    return {raw_norm2, PureState{}};
  }
  const Vector corrected = meas.outcome(m).correction.matrix() * out;
  return {raw_norm2, PureState({dim}, Vector(corrected / std::sqrt(raw_norm2)))};
}

Operator effective_error(const BellMeasurement& meas, OutcomeLabel m, const Operator& fr,
                         const Operator& fb) {
  const int dim = meas.dim;
  if (fr.dim() != dim || fb.dim() != dim) {
    throw std::invalid_argument("effective_error: dimension mismatch");
  }
  const Matrix& u = meas.outcome(m).correction.matrix();
  return Operator(Matrix(u * fb.matrix() * fr.matrix().transpose() * u.adjoint()));
}

SimulationResult enumerate_outcomes(const PureState& psi, const KrausChannel& cr,
                                    const KrausChannel& cb, const BellMeasurement& meas,
                                    const AcceptSet& accept) {
  check_sim_inputs(psi, cr, cb, meas, accept);
  const auto labels = sorted_accept_labels(accept, meas.dim);

  // The tripartite state depends only on (x_r, x_b); build each once.
  std::vector<PureState> states(static_cast<std::size_t>(cr.size()) * cb.size());
  for (int xr = 0; xr < cr.size(); ++xr) {
    for (int xb = 0; xb < cb.size(); ++xb) {
      states[static_cast<std::size_t>(xr) * cb.size() + xb] =
          noisy_initial_state(psi, cr.kraus[xr], cb.kraus[xb]);
    }
  }

  const int dim = meas.dim;
  auto branch = [&](OutcomeLabel m, int xr, int xb) -> Vector {
    const PureState& st = states[static_cast<std::size_t>(xr) * cb.size() + xb];
    auto [raw, corrected] = measure_and_correct(st, meas, m);
    if (corrected.empty()) return Vector::Zero(dim);
    return corrected.amplitudes() * std::sqrt(raw);
  };
  return aggregate_branches(branch, cr, cb, meas, labels);
}

SimulationResult predict_outcomes_via_eq10(const PureState& psi, const KrausChannel& cr,
                                           const KrausChannel& cb,
                                           const BellMeasurement& meas,
                                           const AcceptSet& accept) {
  check_sim_inputs(psi, cr, cb, meas, accept);
  const auto labels = sorted_accept_labels(accept, meas.dim);
  const int dim = meas.dim;

  auto branch = [&](OutcomeLabel m, int xr, int xb) -> Vector {
    const BellOutcome& o = meas.outcome(m);
    const Operator f_out = effective_error(meas, m, cr.kraus[xr], cb.kraus[xb]);
    return Vector(std::sqrt(o.chi) / dim * (f_out.matrix() * psi.amplitudes()));
  };
  return aggregate_branches(branch, cr, cb, meas, labels);
}

SimulationResult sample_outcomes(const PureState& psi, const KrausChannel& cr,
                                 const KrausChannel& cb, const BellMeasurement& meas,
                                 const AcceptSet& accept, std::int64_t shots,
                                 std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample_outcomes: shots must be >= 1");
  SimulationResult exact = enumerate_outcomes(psi, cr, cb, meas, accept);
  const int dim = meas.dim;
  const int nb = cb.size();
  const int n_err = cr.size() * nb;

  // Joint weights over accepted branches, grouped as p(x_r, x_b) * p(m | x_r, x_b).
  const auto labels = sorted_accept_labels(accept, dim);
  const int n_m = static_cast<int>(labels.size());
  std::vector<double> err_weight(static_cast<std::size_t>(n_err), 0.0);
  std::vector<std::vector<double>> m_weight(static_cast<std::size_t>(n_err));
  for (auto& v : m_weight) v.assign(static_cast<std::size_t>(n_m), 0.0);

  std::map<int, int> m_pos;
  for (int i = 0; i < n_m; ++i) m_pos[labels[i].index(dim)] = i;
  for (const auto& rec : exact.records) {
    const int e = rec.xr * nb + rec.xb;
    const int mi = m_pos[rec.m.index(dim)];
    err_weight[static_cast<std::size_t>(e)] += rec.raw_norm2;
    m_weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(mi)] = rec.raw_norm2;
  }

  auto draw = [](Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  };

  Rng rng(seed);
  std::vector<std::int64_t> counts(exact.records.size(), 0);
  for (std::int64_t s = 0; s < shots; ++s) {
    const int e = draw(rng, err_weight);
    const int mi = draw(rng, m_weight[static_cast<std::size_t>(e)]);
    counts[static_cast<std::size_t>(mi) * n_err + e] += 1;
  }

  // Reuse the exact branch states; replace probabilities with frequencies.
  SimulationResult result = exact;
  result.shots = shots;
  Matrix averaged = Matrix::Zero(dim, dim);
  Matrix premessage = Matrix::Zero(dim, dim);
  std::map<OutcomeLabel, Matrix> per_m;
  std::map<OutcomeLabel, double> per_m_prob;
  for (const auto& m : labels) {
    per_m.emplace(m, Matrix::Zero(dim, dim));
    per_m_prob.emplace(m, 0.0);
  }
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    OutcomeRecord& rec = result.records[i];
    rec.prob = static_cast<double>(counts[i]) / static_cast<double>(shots);
    if (rec.null_output || rec.prob == 0.0) continue;
    const Vector& out = rec.output.amplitudes();
    const Matrix proj = out * out.adjoint();
    averaged += rec.prob * proj;
    per_m[rec.m] += rec.prob * proj;
    per_m_prob[rec.m] += rec.prob;
    const Vector uncorrected = meas.outcome(rec.m).correction.matrix().adjoint() * out;
    premessage += rec.prob * (uncorrected * uncorrected.adjoint());
  }
  result.averaged_output = DensityMatrix({dim}, std::move(averaged));
  result.premessage_marginal = DensityMatrix({dim}, std::move(premessage));
  result.per_m_marginals.clear();
  for (const auto& m : labels) {
    const double pm = per_m_prob[m];
    Matrix conditional = pm > 0.0 ? Matrix(per_m[m] / pm) : Matrix(Matrix::Zero(dim, dim));
    result.per_m_marginals.emplace(m, PerOutcomeMarginal{pm, DensityMatrix({dim}, std::move(conditional))});
  }
  return result;
}

DensityMatrix bob_premessage_marginal(const SimulationResult& result) {
  const int dim = result.dim;
  std::vector<bool> seen(static_cast<std::size_t>(dim) * dim, false);
  for (const auto& rec : result.records) seen[static_cast<std::size_t>(rec.m.index(dim))] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("bob_premessage_marginal: needs an accept-all result");
  }
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& rec : result.records) {
    if (rec.null_output || rec.prob == 0.0) continue;
    const Vector uncorrected =
        result.measurement.outcome(rec.m).correction.matrix().adjoint() *
        rec.output.amplitudes();
    out += rec.prob * (uncorrected * uncorrected.adjoint());
  }
  return DensityMatrix({dim}, std::move(out));
}

}  // namespace telsim
