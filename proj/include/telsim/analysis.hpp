#ifndef TELSIM_ANALYSIS_HPP
#define TELSIM_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "telsim/channels.hpp"
#include "telsim/noisy_sim.hpp"
#include "telsim/qmath.hpp"
#include "telsim/teleport.hpp"

namespace telsim {

// A channel as a linear map on N x N matrices (not restricted to states, so
// it can be probed with matrix units).
using MatrixAction = std::function<Matrix(const Matrix&)>;

MatrixAction channel_action(const KrausChannel& c);
MatrixAction compose_actions(MatrixAction first, MatrixAction then);

// Extends a map defined on pure states to a linear map on matrices through
// the polarization identity (matrix units decompose into four projectors).
MatrixAction linear_action_from_pure(std::function<Matrix(const Vector&)> pure_action,
                                     int dim);

// The full teleportation protocol as a channel: every pure input runs through
// the brute-force enumeration (accept-all); general matrices by polarization.
// The probe results are cached, so repeated evaluation stays cheap.
MatrixAction teleport_action(const KrausChannel& cr, const KrausChannel& cb,
                             const BellMeasurement& meas);

struct McEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

// Mean input-output fidelity over Haar-random pure inputs (normalized
// complex-gaussian sampling), with the standard error of the mean.
McEstimate average_fidelity_mc(const MatrixAction& action, int dim, int samples,
                               std::uint64_t seed);

// <E_max| (action (x) id)(|E_max><E_max|) |E_max>.
double entanglement_fidelity(const MatrixAction& action, int dim);

// Exact Haar average of the input-output fidelity,
//   (N^2 F_e + sum_n tr action(|n><n|)) / (N (N + 1)),
// valid also for non-trace-preserving maps (transposed non-unital channels).
double exact_average_fidelity(const MatrixAction& action, int dim);

//---------------------------------------------------------------------------
// Teleportation vs direct transmission
//---------------------------------------------------------------------------

enum class CompareVerdict { equal_within_tol, teleport_noisier_without_m, mismatch };

inline constexpr double compare_tol = 1e-9;

// The equalities that hold for every valid channel pair (the channel-level
// restatement of the effective-error operator) drive the verdict:
//   * exact average fidelity, teleport (brute force) vs direct (Kraus composition),
//   * entanglement fidelity, both sides,
//   * per-input fidelity with the m-correlation retained on the direct side
//     (per-m conjugated transposed-R then conjugated-B, mixed with chi/N^2).
// The m-blind plain direct channel is reported alongside; its per-input gap
// is the extra randomization non-homogeneous errors pick up when m is
// ignored, and is expected to be large for generic channels.
struct ComparisonReport {
  double avg_fidelity_teleport = 0.0;  // exact Haar average, brute-force route
  double avg_fidelity_direct = 0.0;    // exact Haar average, apply_channel route
  double entanglement_fidelity_teleport = 0.0;
  double entanglement_fidelity_direct = 0.0;

  std::map<OutcomeLabel, double> per_m_fidelity;  // mean conditional fidelity per m

  std::vector<double> input_fidelity_teleport;          // brute-force enumeration
  std::vector<double> input_fidelity_direct_matched;    // m-matched channel route
  std::vector<double> input_fidelity_direct_plain;      // m-blind Lambda_B o Lambda_R^T
  std::vector<double> input_fidelity_direct_nontransposed;  // Lambda_B o Lambda_R

  double max_matched_gap = 0.0;   // max |teleport - matched direct| over inputs
  double m_blind_gap = 0.0;       // max |teleport - plain direct| over inputs
  double transposition_gap = 0.0; // max |plain - nontransposed| over inputs

  bool transposed_channel_trace_preserving = true;
  CompareVerdict verdict = CompareVerdict::mismatch;
  double tol = compare_tol;
};

ComparisonReport compare_teleport_vs_direct(const std::vector<PureState>& inputs,
                                            const KrausChannel& cr, const KrausChannel& cb,
                                            const BellMeasurement& meas);

// Convenience overload drawing Haar-random inputs.
ComparisonReport compare_teleport_vs_direct(int haar_samples, std::uint64_t seed,
                                            const KrausChannel& cr, const KrausChannel& cb,
                                            const BellMeasurement& meas);

//---------------------------------------------------------------------------
// Angular momentum transposition (mirror image in the xz-plane)
//---------------------------------------------------------------------------

struct AngularMomentumReport {
  int two_j = 0;
  Operator lx, ly, lz;        // ladder construction in the l_z eigenbasis, hbar = 1
  double norm_lx_transpose_minus_lx = 0.0;
  double norm_ly_transpose_plus_ly = 0.0;
  double norm_lz_transpose_minus_lz = 0.0;
};

// two_j = 2j must be a positive integer; the matrices act on N = 2j+1 levels.
AngularMomentumReport angular_momentum_transpose_report(int two_j);

//---------------------------------------------------------------------------
// Combined homogeneity classification for one channel
//---------------------------------------------------------------------------

struct ChannelHomogeneity {
  HomogeneityReport weyl;       // conjugation by every U(m) of the measurement
  HomogeneityReport transpose;
  bool covariant_under_weyl = false;
  bool transpose_homogeneous = false;
  // Both tests passing predicts m-independent per-m teleport statistics.
  bool predicts_m_independent_outputs = false;
};

ChannelHomogeneity homogeneity_report(const KrausChannel& c, const BellMeasurement& meas);

}  // namespace telsim

#endif  // TELSIM_ANALYSIS_HPP
