#include "telsim/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace telsim {

namespace {

// The N distinct phases w^k, tabulated once so repeated entries are
// bit-identical and sums cancel cleanly. Quarter-circle points are snapped to
// their exact values.
std::vector<cxd> roots_of_unity(int dim) {
  std::vector<cxd> w(dim);
  for (int k = 0; k < dim; ++k) {
    if ((4 * k) % dim == 0) {
      static const cxd quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      w[k] = quarter[4 * k / dim];
    } else {
      w[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / dim);
    }
  }
  return w;
}

}  // namespace

Operator weyl_unitary(int dim, int a, int b) {
  if (dim < 1) throw std::invalid_argument("weyl_unitary: dim must be >= 1");
  if (a < 0 || a >= dim || b < 0 || b >= dim) {
    throw std::invalid_argument("weyl_unitary: labels must satisfy 0 <= a,b < dim");
  }
  const auto w = roots_of_unity(dim);
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    m((n + a) % dim, n) = w[(static_cast<long>(b) * n) % dim];
  }
  return Operator(std::move(m));
}

PureState max_entangled(int dim) {
  if (dim < 2) throw std::invalid_argument("max_entangled: dim must be >= 2");
  Vector v = Vector::Zero(static_cast<long>(dim) * dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int n = 0; n < dim; ++n) v(static_cast<long>(n) * dim + n) = amp;
  return PureState({dim, dim}, std::move(v));
}

BellMeasurement BellMeasurement::standard(int dim) {
  if (dim < 2) throw std::invalid_argument("BellMeasurement::standard: dim must be >= 2");
  BellMeasurement meas;
  meas.dim = dim;
  meas.outcomes.reserve(static_cast<std::size_t>(dim) * dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      meas.outcomes.push_back({OutcomeLabel{a, b}, 1.0, weyl_unitary(dim, a, b)});
    }
  }
  return meas;
}

const BellOutcome& BellMeasurement::outcome(OutcomeLabel m) const {
  for (const auto& o : outcomes) {
    if (o.m == m) return o;
  }
  throw std::invalid_argument("BellMeasurement: unknown outcome label");
}

bool BellMeasurement::has_outcome(OutcomeLabel m) const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [&](const BellOutcome& o) { return o.m == m; });
}

AcceptSet AcceptSet::all(int dim) {
  AcceptSet s;
  s.accepted.reserve(static_cast<std::size_t>(dim) * dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) s.accepted.push_back({a, b});
  }
  return s;
}

bool AcceptSet::contains(OutcomeLabel m) const {
  return std::find(accepted.begin(), accepted.end(), m) != accepted.end();
}

bool AcceptSet::is_all(int dim) const {
  return static_cast<int>(accepted.size()) == dim * dim;
}

PureState bell_state(const BellMeasurement& meas, OutcomeLabel m) {
  const BellOutcome& o = meas.outcome(m);
  const int dim = meas.dim;
  const Matrix& u = o.correction.matrix();
  Vector v = Vector::Zero(static_cast<long>(dim) * dim);
  const double pref = std::sqrt(o.chi / dim);
  for (int n = 0; n < dim; ++n) {
    for (int i = 0; i < dim; ++i) {
      v(static_cast<long>(i) * dim + n) += pref * u(i, n);
    }
  }
  return PureState({dim, dim}, std::move(v));
}

double check_povm_completeness(const BellMeasurement& meas) {
  const int pair_dim = meas.dim * meas.dim;
  Matrix sum = Matrix::Zero(pair_dim, pair_dim);
  for (const auto& o : meas.outcomes) {
    const Vector p = bell_state(meas, o.m).amplitudes();
    sum += p * p.adjoint();
  }
  return max_abs(Matrix(sum - Matrix::Identity(pair_dim, pair_dim)));
}

IdealOutcome ideal_teleport_outcome(const PureState& psi, const BellMeasurement& meas,
                                    OutcomeLabel m) {
  const int dim = meas.dim;
  if (psi.total_dim() != dim) {
    throw std::invalid_argument("ideal_teleport_outcome: psi dimension mismatch");
  }
  if (std::abs(psi.norm2() - 1.0) > tol_alg) {
    throw std::invalid_argument("ideal_teleport_outcome: psi must be normalized");
  }
  const BellOutcome& o = meas.outcome(m);

  // (1/sqrt(N)) sum_n |psi>_A |n>_R |n>_B, projected onto <P(m)| on A,R:
  //   out_B = sum_{iA,iR} conj(P[iA*N+iR]) * psi_A[iA] * delta(iR, iB-slot)
  const Vector p = bell_state(meas, m).amplitudes();
  Vector out = Vector::Zero(dim);
  const double pref = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int ia = 0; ia < dim; ++ia) {
    for (int n = 0; n < dim; ++n) {
      out(n) += std::conj(p(static_cast<long>(ia) * dim + n)) * psi.amplitudes()(ia) * pref;
    }
  }

  IdealOutcome result;
  result.prob = out.squaredNorm();
  PureState raw({dim}, std::move(out));
  result.pre_correction = raw.normalized();
  result.corrected = PureState(
      {dim}, Vector(o.correction.matrix() * result.pre_correction.amplitudes()));
  return result;
}

}  // namespace telsim
