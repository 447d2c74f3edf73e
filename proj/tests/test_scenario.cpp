#include <doctest.h>

#include <cstring>
#include <string>

#include "telsim/scenario.hpp"

using namespace telsim;

namespace {

const char* kMinimal = R"json({
  "dim": 2,
  "input_state": "plus",
  "channel_r": {"kind": "identity"},
  "channel_b": {"kind": "identity"},
  "mode": "exact",
  "reports": ["outcomes"]
})json";

bool has_issue(const ParseResult& result, const std::string& field_part,
               const std::string& message_part = "") {
  const auto* issues = std::get_if<std::vector<ParseIssue>>(&result);
  if (!issues) return false;
  for (const auto& issue : *issues) {
    if (issue.field.find(field_part) != std::string::npos &&
        issue.message.find(message_part) != std::string::npos) {
      return true;
    }
  }
  return false;
}

bool doubles_bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("parse_scenario") {
  SUBCASE("minimal scenario") {
    const ParseResult result = parse_scenario(kMinimal);
    REQUIRE(std::holds_alternative<Scenario>(result));
    const Scenario& s = std::get<Scenario>(result);
    CHECK(s.dim == 2);
    CHECK(s.input_kind == Scenario::InputKind::plus);
    CHECK(s.channel_r.kind == ChannelKind::identity);
    CHECK(s.mode == Scenario::Mode::exact);
    CHECK_FALSE(s.accept.has_value());
    CHECK(s.reports.outcomes);
    CHECK_FALSE(s.reports.compare);
  }

  SUBCASE("doubled identity set is a semantic error with the deviation") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "zero",
      "channel_r": {"kind": "custom", "kraus": [
        [[[1,0],[0,0]],[[0,0],[1,0]]],
        [[[1,0],[0,0]],[[0,0],[1,0]]]
      ]},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "reports": ["outcomes"]
    })json";
    const ParseResult result = parse_scenario(text);
    CHECK(has_issue(result, "channel_r.kraus", "deviates"));
    CHECK(has_issue(result, "channel_r.kraus", "1"));
  }

  SUBCASE("accept label out of range") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "plus",
      "channel_r": {"kind": "identity"},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "accept": [[2, 0]],
      "reports": ["outcomes"]
    })json";
    CHECK(has_issue(parse_scenario(text), "accept[0]", "0 <= a,b < dim"));
  }

  SUBCASE("unknown fields are rejected") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "plus",
      "channel_r": {"kind": "identity", "extra": 1},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "reports": ["outcomes"],
      "bogus": true
    })json";
    const ParseResult result = parse_scenario(text);
    CHECK(has_issue(result, "scenario.bogus", "unknown field"));
    CHECK(has_issue(result, "channel_r.extra", "unknown field"));
  }

  SUBCASE("malformed document / fields") {
    CHECK(has_issue(parse_scenario("{"), "<document>"));
    CHECK(has_issue(parse_scenario(R"json({"dim": 2})json"), "input_state"));
    const std::string bad_input = R"json({
      "dim": 2, "input_state": "haar", "channel_r": {"kind": "identity"},
      "channel_b": {"kind": "identity"}, "mode": "exact", "reports": ["outcomes"]
    })json";
    CHECK(has_issue(parse_scenario(bad_input), "input_state"));
  }

  SUBCASE("amplitude list input") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": [[0.7071067811865476, 0], [0, 0.7071067811865476]],
      "channel_r": {"kind": "identity"},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "reports": ["outcomes"]
    })json";
    const ParseResult result = parse_scenario(text);
    REQUIRE(std::holds_alternative<Scenario>(result));
    CHECK(scenario_input_state(std::get<Scenario>(result)).is_normalized());
  }

  SUBCASE("angular report parses half-integers") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "plus",
      "channel_r": {"kind": "identity"},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "reports": [{"angular": {"j": 1.5}}]
    })json";
    const ParseResult result = parse_scenario(text);
    REQUIRE(std::holds_alternative<Scenario>(result));
    CHECK(std::get<Scenario>(result).reports.angular_two_j == 3);
  }
}

TEST_CASE("run_scenario") {
  SUBCASE("identity scenario reports fidelity 1 everywhere") {
    const ParseResult parsed = parse_scenario(kMinimal);
    const RunOutput out = run_scenario(std::get<Scenario>(parsed));
    CHECK(out.exit_code == 0);
    // 4 outcome rows, each probability 0.25 and fidelity 1.
    std::size_t count = 0, pos = 0;
    while ((pos = out.table_text.find("1.000000000", pos)) != std::string::npos) {
      ++count;
      pos += 1;
    }
    CHECK(count >= 4);
    CHECK(out.structured["outcomes"]["total_probability"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("depolarizing compare agrees to many digits") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "haar(5)",
      "channel_r": {"kind": "uniform_depolarizing", "p": 0.3},
      "channel_b": {"kind": "uniform_depolarizing", "p": 0.3},
      "mode": "exact",
      "reports": ["compare"]
    })json";
    const RunOutput out = run_scenario(std::get<Scenario>(parse_scenario(text)));
    CHECK(out.exit_code == 0);
    CHECK(out.structured["compare"]["verdict"] == "equal-within-tol");
    const double tel = out.structured["compare"]["avg_fidelity_teleport"].get<double>();
    const double dir = out.structured["compare"]["avg_fidelity_direct"].get<double>();
    CHECK(std::abs(tel - dir) < 1e-10);
  }

  SUBCASE("angular report stays below tolerance") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "plus",
      "channel_r": {"kind": "identity"},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "reports": [{"angular": {"j": 1.0}}]
    })json";
    const RunOutput out = run_scenario(std::get<Scenario>(parse_scenario(text)));
    CHECK(out.exit_code == 0);
    CHECK(out.structured["angular"]["norm_ly_transpose_plus_ly"].get<double>() < 1e-12);
    CHECK(out.structured["angular"]["norm_lx_transpose_minus_lx"].get<double>() < 1e-12);
  }

  SUBCASE("structured output round-trips bit-identically") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "haar(9)",
      "channel_r": {"kind": "dephasing", "p": 0.35},
      "channel_b": {"kind": "amplitude_damping", "gamma": 0.2},
      "mode": "exact",
      "reports": ["outcomes"]
    })json";
    const RunOutput out = run_scenario(std::get<Scenario>(parse_scenario(text)));
    const std::string dumped = out.structured.dump(2);
    const auto reloaded = nlohmann::ordered_json::parse(dumped);
    for (std::size_t i = 0; i < out.structured["outcomes"]["per_m"].size(); ++i) {
      const auto& orig = out.structured["outcomes"]["per_m"][i];
      const auto& back = reloaded["outcomes"]["per_m"][i];
      CHECK(doubles_bit_equal(orig["probability"].get<double>(),
                              back["probability"].get<double>()));
      CHECK(doubles_bit_equal(orig["fidelity"].get<double>(), back["fidelity"].get<double>()));
    }
    for (std::size_t i = 0; i < out.structured["outcomes"]["records"].size(); ++i) {
      CHECK(doubles_bit_equal(
          out.structured["outcomes"]["records"][i]["probability"].get<double>(),
          reloaded["outcomes"]["records"][i]["probability"].get<double>()));
    }
  }

  SUBCASE("sampling runs are byte-identical for a fixed seed") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "haar(3)",
      "channel_r": {"kind": "dephasing", "p": 0.25},
      "channel_b": {"kind": "identity"},
      "mode": {"sample": {"shots": 20000, "seed": 11}},
      "reports": ["outcomes"]
    })json";
    const Scenario s = std::get<Scenario>(parse_scenario(text));
    const RunOutput a = run_scenario(s);
    const RunOutput b = run_scenario(s);
    CHECK(a.structured.dump(2) == b.structured.dump(2));
  }

  SUBCASE("tolerance override trips the oracle cross-check") {
    RunOptions options;
    options.tol_override = 1e-30;
    const RunOutput out =
        run_scenario(std::get<Scenario>(parse_scenario(kMinimal)), options);
    CHECK(out.exit_code == 2);
    CHECK(out.table_text.find("INVARIANT VIOLATION") != std::string::npos);
  }

  SUBCASE("accept subset renormalizes") {
    const std::string text = R"json({
      "dim": 2,
      "input_state": "plus",
      "channel_r": {"kind": "identity"},
      "channel_b": {"kind": "identity"},
      "mode": "exact",
      "accept": [[0, 0], [1, 0]],
      "reports": ["outcomes"]
    })json";
    const RunOutput out = run_scenario(std::get<Scenario>(parse_scenario(text)));
    CHECK(out.exit_code == 0);
    CHECK(out.structured["outcomes"]["acceptance_probability"].get<double>() ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.structured["outcomes"]["total_probability"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}
