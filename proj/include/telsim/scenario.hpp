#ifndef TELSIM_SCENARIO_HPP
#define TELSIM_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "telsim/channels.hpp"
#include "telsim/qmath.hpp"
#include "telsim/teleport.hpp"

namespace telsim {

//---------------------------------------------------------------------------
// Scenario file format (JSON, strict):
//
// {
//   "dim": 2,
//   "input_state": "plus",                  // "zero" | "plus" | "haar(SEED)"
//                                           // | [[re,im], ...] (length dim)
//   "channel_r": {"kind": "identity"},
//   "channel_b": {"kind": "dephasing", "p": 0.3},
//   "mode": "exact",                         // or {"sample": {"shots": N, "seed": S}}
//   "accept": "all",                         // or [[a,b], ...]
//   "reports": ["outcomes", "compare", "homogeneity", {"angular": {"j": 1.5}}]
// }
//
// Channel kinds: identity | dephasing(p) | uniform_depolarizing(p) |
// weyl(weights: dim^2 numbers) | unitary_error(p, unitary: matrix) |
// amplitude_damping(gamma, dim 2 only) | custom(kraus: [matrix, ...]).
// Matrices are row-major lists of rows; complex entries are [re, im] pairs.
// Unknown fields anywhere are errors.
//---------------------------------------------------------------------------

struct Scenario {
  int dim = 0;

  enum class InputKind { zero, plus, haar, amplitudes };
  InputKind input_kind = InputKind::plus;
  std::uint64_t haar_seed = 0;
  Vector amplitudes;  // input_kind == amplitudes

  ChannelSpec channel_r, channel_b;

  enum class Mode { exact, sample };
  Mode mode = Mode::exact;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;

  std::optional<std::vector<OutcomeLabel>> accept;  // nullopt = all

  struct Reports {
    bool outcomes = false;
    bool compare = false;
    bool homogeneity = false;
    std::optional<int> angular_two_j;
  };
  Reports reports;
};

struct ParseIssue {
  std::string field;
  std::string message;
};

using ParseResult = std::variant<Scenario, std::vector<ParseIssue>>;

// Strict parse + semantic validation (channel completeness, label ranges,
// input normalization). All violations are collected with field paths; no
// simulation runs on a rejected scenario.
ParseResult parse_scenario(const std::string& text);

struct RunOptions {
  bool quiet = false;
  std::optional<double> tol_override;  // testing only: runtime-check tolerance
};

struct RunOutput {
  std::string table_text;              // human-readable report
  nlohmann::ordered_json structured;   // machine-readable, full precision
  int exit_code = 0;                   // 0 ok, 2 runtime invariant violation
};

// Executes the requested reports. Exact mode cross-checks the enumeration
// against the effective-error prediction branch by branch and fails (exit
// code 2) on any violation beyond tolerance.
RunOutput run_scenario(const Scenario& s, const RunOptions& options = {});

// Reconstructs the input state described by the scenario.
PureState scenario_input_state(const Scenario& s);

}  // namespace telsim

#endif  // TELSIM_SCENARIO_HPP
