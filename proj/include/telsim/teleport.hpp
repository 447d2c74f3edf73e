#ifndef TELSIM_TELEPORT_HPP
#define TELSIM_TELEPORT_HPP

#include <compare>
#include <vector>

#include "telsim/qmath.hpp"

namespace telsim {

// Measurement outcome label m = (a, b), a,b in Z_N; linear index a*N + b.
struct OutcomeLabel {
  int a = 0;
  int b = 0;

  int index(int dim) const { return a * dim + b; }
  auto operator<=>(const OutcomeLabel&) const = default;
};

//---------------------------------------------------------------------------
// BellMeasurement: family of N^2 entangled projector states
//   |P(m)> = sqrt(chi(m)/N) sum_n (U(m)|n>) (x) |n>
// with weights chi(m) and correction unitaries U(m). The default (standard)
// construction uses the Weyl-Heisenberg family U(a,b) = X^a Z^b with
// chi = 1, which makes the completeness sum an equality.
//---------------------------------------------------------------------------
struct BellOutcome {
  OutcomeLabel m;
  double chi = 1.0;
  Operator correction;
};

struct BellMeasurement {
  int dim = 0;
  std::vector<BellOutcome> outcomes;

  static BellMeasurement standard(int dim);

  const BellOutcome& outcome(OutcomeLabel m) const;  // throws on unknown label
  bool has_outcome(OutcomeLabel m) const;
};

// Subset of outcome labels kept in conditional teleportation.
struct AcceptSet {
  std::vector<OutcomeLabel> accepted;

  static AcceptSet all(int dim);
  bool contains(OutcomeLabel m) const;
  bool is_all(int dim) const;
};

// X^a Z^b with X|n> = |n+1 mod N> and Z|n> = w^n |n>, w = exp(2 pi i / N).
Operator weyl_unitary(int dim, int a, int b);

// (1/sqrt(N)) sum_n |n>|n>, dims {N, N}.
PureState max_entangled(int dim);

// sqrt(chi(m)/N) sum_n (U(m)|n>) (x) |n>.
PureState bell_state(const BellMeasurement& meas, OutcomeLabel m);

// Max-norm of sum_m |P(m)><P(m)| - 1 on the pair space. The standard
// construction stays below 1e-12 for N <= 8; larger deviations signal a
// conditional (incomplete) measurement.
double check_povm_completeness(const BellMeasurement& meas);

struct IdealOutcome {
  double prob = 0.0;            // chi(m)/N^2 for the standard family
  PureState pre_correction;     // normalized conditional state on B, prop. to U^-1(m)|psi>
  PureState corrected;          // after applying U(m); equals |psi> up to phase
};

// Projects the ideal tripartite state onto <P(m)| on A,R and applies the
// correction. psi must be normalized.
IdealOutcome ideal_teleport_outcome(const PureState& psi, const BellMeasurement& meas,
                                    OutcomeLabel m);

}  // namespace telsim

#endif  // TELSIM_TELEPORT_HPP
