#ifndef TELSIM_CHANNELS_HPP
#define TELSIM_CHANNELS_HPP

#include <string>
#include <vector>

#include "telsim/qmath.hpp"

namespace telsim {

//---------------------------------------------------------------------------
// KrausChannel: finite family {F(x)} with sum_x F'(x)F(x) = 1.
//
// Transposing a valid Kraus set can break completeness (the transpose is
// complete iff the original channel is unital); transpose_channel leaves such
// sets usable but flagged, and callers decide.
//---------------------------------------------------------------------------
struct KrausChannel {
  int dim = 0;
  std::vector<Operator> kraus;
  std::vector<std::string> labels;  // optional, parallel to kraus when present

  bool flagged_non_trace_preserving = false;
  double completeness_deviation = 0.0;

  int size() const { return static_cast<int>(kraus.size()); }
  const std::string& label(int x) const;
};

struct ChannelValidation {
  bool ok = false;
  double deviation = 0.0;  // max-norm of sum F'F - 1
};

// Checks the completeness sum; reports the deviation instead of throwing.
ChannelValidation validate_channel(const KrausChannel& c);

// sum_x F(x) rho F'(x). Trace-preserving within tol_alg for valid channels.
DensityMatrix apply_channel(const KrausChannel& c, const DensityMatrix& rho);

// Linear extension of the channel to arbitrary matrices (needed for Choi /
// entanglement-fidelity machinery where matrix units are not valid states).
Matrix apply_channel_matrix(const KrausChannel& c, const Matrix& m);

// Entrywise computational-basis transpose of every Kraus element. The result
// is revalidated and flagged when the transposed set is not trace preserving.
KrausChannel transpose_channel(const KrausChannel& c);

// {U F(x) U^-1}: the channel as seen after a unitary frame change.
KrausChannel conjugate_channel(const KrausChannel& c, const Operator& u);

//---------------------------------------------------------------------------
// Homogeneity classification
//---------------------------------------------------------------------------

// One matched element: conjugated (or transposed) element `source` maps to
// original element `matched` with a global phase. `ambiguous` marks a second
// candidate within match tolerance of the chosen one.
struct MatchWitness {
  int source = -1;
  int matched = -1;
  cxd phase{1.0, 0.0};
  double residual = 0.0;  // Frobenius distance after phase alignment
  bool ambiguous = false;
};

struct HomogeneityReport {
  // Only the field for the performed test is meaningful; homogeneity_report
  // in the analysis module merges both checks.
  bool covariant_under_weyl = false;
  bool transpose_homogeneous = false;

  // One witness list per tested unitary (a single list for the transpose
  // test), present when a full matching was found.
  std::vector<std::vector<MatchWitness>> witnesses;
  double residual = 0.0;  // max mismatch over all attempted matches
};

// Set-equality tolerance for the permutation/phase matching (Eqs. of
// homogeneity are phase-blind; global phases are unobservable).
inline constexpr double tol_match = 1e-8;

// Tests whether {U F(x) U^-1} equals {F(x')} as a set, up to a permutation
// and per-element global phases, for every supplied unitary. Throws on
// non-unitary input.
HomogeneityReport check_unitary_homogeneity(const KrausChannel& c,
                                            const std::vector<Operator>& unitaries);

// Tests whether the transposed Kraus set equals the original one under the
// same matching rule.
HomogeneityReport check_transpose_homogeneity(const KrausChannel& c);

//---------------------------------------------------------------------------
// Standard channel builders
//---------------------------------------------------------------------------

enum class ChannelKind {
  identity,
  dephasing,
  uniform_depolarizing,
  weyl,
  unitary_error,
  amplitude_damping,
  custom,
};

struct ChannelSpec {
  ChannelKind kind = ChannelKind::identity;
  double p = 0.0;                // dephasing / uniform_depolarizing / unitary_error
  double gamma = 0.0;            // amplitude_damping
  std::vector<double> weights;   // weyl: N*N entries, row-major in (a, b)
  Matrix unitary;                // unitary_error
  std::vector<Matrix> kraus;     // custom
};

// {I}
KrausChannel make_identity_channel(int dim);
// {sqrt(1-p) I, sqrt(p) Z}
KrausChannel make_dephasing_channel(int dim, double p);
// {sqrt(1-p+p/N^2) I} u {sqrt(p/N^2) X^a Z^b : (a,b) != (0,0)}
KrausChannel make_uniform_depolarizing_channel(int dim, double p);
// {sqrt(p_ab) X^a Z^b}, weights summing to 1
KrausChannel make_weyl_channel(int dim, std::vector<double> weights);
// {sqrt(1-p) I, sqrt(p) U}
KrausChannel make_unitary_error_channel(const Operator& u, double p);
// dim 2 only: {diag(1, sqrt(1-gamma)), [[0, sqrt(gamma)], [0, 0]]}
KrausChannel make_amplitude_damping_channel(double gamma);
// Arbitrary Kraus list; throws if the completeness sum fails.
KrausChannel make_custom_channel(int dim, std::vector<Operator> kraus);

// Single entry point used by the scenario runner. Throws std::invalid_argument
// on out-of-range parameters.
KrausChannel build_standard_channel(const ChannelSpec& spec, int dim);

}  // namespace telsim

#endif  // TELSIM_CHANNELS_HPP
