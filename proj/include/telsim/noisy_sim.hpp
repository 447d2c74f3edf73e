#ifndef TELSIM_NOISY_SIM_HPP
#define TELSIM_NOISY_SIM_HPP

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "telsim/channels.hpp"
#include "telsim/qmath.hpp"
#include "telsim/teleport.hpp"

namespace telsim {

// Branches at or below this weight carry a null output instead of a
// normalized state (no 0/0 normalization, bookkeeping stays complete).
inline constexpr double null_branch_threshold = 1e-14;

// Post-selection on an accept set with less total weight than this fails.
inline constexpr double min_acceptance_probability = 1e-12;

//---------------------------------------------------------------------------
// One simulated branch (m, x_r, x_b).
//---------------------------------------------------------------------------
struct OutcomeRecord {
  OutcomeLabel m;
  int xr = 0;
  int xb = 0;
  double prob = 0.0;       // renormalized by the acceptance probability
  double raw_norm2 = 0.0;  // squared norm of the unnormalized branch
  PureState output;        // normalized corrected state on B; empty when null
  bool null_output = false;
};

struct PerOutcomeMarginal {
  double prob = 0.0;
  DensityMatrix state;  // conditional output given m (zero matrix if prob ~ 0)
};

struct SimulationResult {
  int dim = 0;
  BellMeasurement measurement;
  // Lexicographic in (m.index, x_r, x_b); deterministic across runs.
  std::vector<OutcomeRecord> records;
  DensityMatrix averaged_output;
  std::map<OutcomeLabel, PerOutcomeMarginal> per_m_marginals;
  // B marginal before classical communication (corrections not applied).
  DensityMatrix premessage_marginal;
  double acceptance_probability = 1.0;
  std::int64_t shots = 0;  // 0 for exact enumeration
};

// (1/sqrt(N)) sum_n |psi>_A (x) (F_R|n>)_R (x) (F_B|n>)_B; unnormalized for
// non-unitary errors.
PureState noisy_initial_state(const PureState& psi, const Operator& fr, const Operator& fb);

// Projects subsystems A,R of a tripartite state onto <P(m)| and applies U(m)
// to the B remainder. Returns the squared branch norm and the normalized
// corrected state (empty below null_branch_threshold).
std::pair<double, PureState> measure_and_correct(const PureState& state,
                                                 const BellMeasurement& meas,
                                                 OutcomeLabel m);

// F_out(m; x_r, x_b) = U(m) F_B F_R^T U^-1(m).
Operator effective_error(const BellMeasurement& meas, OutcomeLabel m, const Operator& fr,
                         const Operator& fb);

// Exact enumeration over all (m in accept, x_r, x_b), each branch simulated
// through the full tripartite projection. Throws std::runtime_error when the
// acceptance probability is below min_acceptance_probability.
SimulationResult enumerate_outcomes(const PureState& psi, const KrausChannel& cr,
                                    const KrausChannel& cb, const BellMeasurement& meas,
                                    const AcceptSet& accept);

// Same record grid built directly from the effective error operators,
// branch = (sqrt(chi(m))/N) F_out |psi>, never touching the tripartite state.
// Matching enumerate_outcomes branch-by-branch is the central oracle test.
SimulationResult predict_outcomes_via_eq10(const PureState& psi, const KrausChannel& cr,
                                           const KrausChannel& cb,
                                           const BellMeasurement& meas,
                                           const AcceptSet& accept);

// Monte Carlo counterpart: draws (x_r, x_b) from the branch norms, then m
// from the conditional norms. Reproducible from the seed; probabilities are
// empirical frequencies, branch states exact.
SimulationResult sample_outcomes(const PureState& psi, const KrausChannel& cr,
                                 const KrausChannel& cb, const BellMeasurement& meas,
                                 const AcceptSet& accept, std::int64_t shots,
                                 std::uint64_t seed);

// Probability-weighted mixture of the uncorrected branch states (corrections
// undone via U^-1(m)). Requires an accept-all result; equals 1/N for ideal
// channels regardless of the input.
DensityMatrix bob_premessage_marginal(const SimulationResult& result);

}  // namespace telsim

#endif  // TELSIM_NOISY_SIM_HPP
