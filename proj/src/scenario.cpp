#include "telsim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "telsim/analysis.hpp"
#include "telsim/noisy_sim.hpp"
#include "telsim/random.hpp"

namespace telsim {

using nlohmann::ordered_json;
using json = nlohmann::json;

//---------------------------------------------------------------------------
// Parsing
//---------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::string& path,
                const std::vector<std::string>& allowed, std::vector<ParseIssue>& issues) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const auto& a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) issues.push_back({path + "." + key, "unknown field"});
  }
}

bool parse_complex(const json& v, cxd& out) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) return false;
  out = cxd(v[0].get<double>(), v[1].get<double>());
  return true;
}

bool parse_matrix(const json& v, int dim, Matrix& out) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) return false;
  out.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) return false;
    for (int jcol = 0; jcol < dim; ++jcol) {
      cxd c;
      if (!parse_complex(row[static_cast<std::size_t>(jcol)], c)) return false;
      out(i, jcol) = c;
    }
  }
  return true;
}

void parse_channel(const json& v, const std::string& path, int dim, ChannelSpec& spec,
                   std::vector<ParseIssue>& issues) {
  if (!v.is_object()) {
    issues.push_back({path, "must be an object with a \"kind\" field"});
    return;
  }
  if (!v.contains("kind") || !v["kind"].is_string()) {
    issues.push_back({path + ".kind", "missing or not a string"});
    return;
  }
  const std::string kind = v["kind"].get<std::string>();

  auto need_p = [&](ChannelKind k) {
    check_keys(v, path, {"kind", "p"}, issues);
    spec.kind = k;
    if (!v.contains("p") || !v["p"].is_number()) {
      issues.push_back({path + ".p", "missing or not a number"});
      return;
    }
    spec.p = v["p"].get<double>();
    if (spec.p < 0.0 || spec.p > 1.0) issues.push_back({path + ".p", "must lie in [0, 1]"});
  };

  if (kind == "identity") {
    check_keys(v, path, {"kind"}, issues);
    spec.kind = ChannelKind::identity;
  } else if (kind == "dephasing") {
    need_p(ChannelKind::dephasing);
  } else if (kind == "uniform_depolarizing") {
    need_p(ChannelKind::uniform_depolarizing);
  } else if (kind == "weyl") {
    check_keys(v, path, {"kind", "weights"}, issues);
    spec.kind = ChannelKind::weyl;
    if (!v.contains("weights") || !v["weights"].is_array() ||
        static_cast<int>(v["weights"].size()) != dim * dim) {
      issues.push_back({path + ".weights", "needs dim^2 numbers"});
      return;
    }
    double sum = 0.0;
    for (const auto& w : v["weights"]) {
      if (!w.is_number()) {
        issues.push_back({path + ".weights", "entries must be numbers"});
        return;
      }
      const double d = w.get<double>();
      if (d < 0.0) issues.push_back({path + ".weights", "entries must be >= 0"});
      spec.weights.push_back(d);
      sum += d;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      issues.push_back({path + ".weights", "must sum to 1"});
    }
  } else if (kind == "unitary_error") {
    check_keys(v, path, {"kind", "p", "unitary"}, issues);
    spec.kind = ChannelKind::unitary_error;
    if (!v.contains("p") || !v["p"].is_number()) {
      issues.push_back({path + ".p", "missing or not a number"});
    } else {
      spec.p = v["p"].get<double>();
      if (spec.p < 0.0 || spec.p > 1.0) issues.push_back({path + ".p", "must lie in [0, 1]"});
    }
    if (!v.contains("unitary") || !parse_matrix(v["unitary"], dim, spec.unitary)) {
      issues.push_back({path + ".unitary", "needs a dim x dim matrix of [re, im] pairs"});
    } else if (!Operator(spec.unitary).is_unitary()) {
      issues.push_back({path + ".unitary", "matrix is not unitary within 1e-10"});
    }
  } else if (kind == "amplitude_damping") {
    check_keys(v, path, {"kind", "gamma"}, issues);
    spec.kind = ChannelKind::amplitude_damping;
    if (dim != 2) issues.push_back({path, "amplitude_damping supports dim 2 only"});
    if (!v.contains("gamma") || !v["gamma"].is_number()) {
      issues.push_back({path + ".gamma", "missing or not a number"});
    } else {
      spec.gamma = v["gamma"].get<double>();
      if (spec.gamma < 0.0 || spec.gamma > 1.0) {
        issues.push_back({path + ".gamma", "must lie in [0, 1]"});
      }
    }
  } else if (kind == "custom") {
    check_keys(v, path, {"kind", "kraus"}, issues);
    spec.kind = ChannelKind::custom;
    if (!v.contains("kraus") || !v["kraus"].is_array() || v["kraus"].empty()) {
      issues.push_back({path + ".kraus", "needs a non-empty list of matrices"});
      return;
    }
    for (std::size_t i = 0; i < v["kraus"].size(); ++i) {
      Matrix m;
      if (!parse_matrix(v["kraus"][i], dim, m)) {
        issues.push_back({path + ".kraus[" + std::to_string(i) + "]",
                          "needs a dim x dim matrix of [re, im] pairs"});
        return;
      }
      spec.kraus.push_back(std::move(m));
    }
    // Kraus completeness is a semantic error at parse time, reported with the
    // measured deviation.
    KrausChannel probe;
    probe.dim = dim;
    for (const auto& m : spec.kraus) probe.kraus.emplace_back(m);
    const ChannelValidation val = validate_channel(probe);
    if (!val.ok) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", val.deviation);
      issues.push_back({path + ".kraus",
                        std::string("Kraus completeness sum deviates from identity by ") + buf});
    }
  } else {
    issues.push_back({path + ".kind", "unknown channel kind \"" + kind + "\""});
  }
}

}  // namespace

ParseResult parse_scenario(const std::string& text) {
  std::vector<ParseIssue> issues;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    issues.push_back({"<document>", e.what()});
    return issues;
  }
  if (!root.is_object()) {
    issues.push_back({"<document>", "top level must be an object"});
    return issues;
  }

  Scenario s;
  check_keys(root, "scenario",
             {"dim", "input_state", "channel_r", "channel_b", "mode", "accept", "reports"},
             issues);

  if (!root.contains("dim") || !root["dim"].is_number_integer()) {
    issues.push_back({"scenario.dim", "missing or not an integer"});
    return issues;  // everything else depends on dim
  }
  s.dim = root["dim"].get<int>();
  if (s.dim < 2 || s.dim > 16) {
    issues.push_back({"scenario.dim", "must lie in [2, 16]"});
    return issues;
  }

  // input_state
  if (!root.contains("input_state")) {
    issues.push_back({"scenario.input_state", "missing"});
  } else if (root["input_state"].is_string()) {
    const std::string spec = root["input_state"].get<std::string>();
    std::smatch match;
    if (spec == "zero") {
      s.input_kind = Scenario::InputKind::zero;
    } else if (spec == "plus") {
      s.input_kind = Scenario::InputKind::plus;
    } else if (std::regex_match(spec, match, std::regex(R"(haar\((\d+)\))"))) {
      s.input_kind = Scenario::InputKind::haar;
      s.haar_seed = std::stoull(match[1].str());
    } else {
      issues.push_back({"scenario.input_state",
                        "expected \"zero\", \"plus\", \"haar(SEED)\" or an amplitude list"});
    }
  } else if (root["input_state"].is_array()) {
    s.input_kind = Scenario::InputKind::amplitudes;
    const json& arr = root["input_state"];
    if (static_cast<int>(arr.size()) != s.dim) {
      issues.push_back({"scenario.input_state", "amplitude list must have dim entries"});
    } else {
      s.amplitudes.resize(s.dim);
      bool ok = true;
      for (int i = 0; i < s.dim; ++i) {
        cxd c;
        if (!parse_complex(arr[static_cast<std::size_t>(i)], c)) {
          issues.push_back({"scenario.input_state[" + std::to_string(i) + "]",
                            "entries must be [re, im] pairs"});
          ok = false;
          break;
        }
        s.amplitudes(i) = c;
      }
      if (ok) {
        const double n2 = s.amplitudes.squaredNorm();
        if (std::abs(n2 - 1.0) > 1e-6) {
          issues.push_back({"scenario.input_state", "amplitudes must be normalized"});
        } else {
          s.amplitudes /= std::sqrt(n2);
        }
      }
    }
  } else {
    issues.push_back({"scenario.input_state", "must be a string or amplitude list"});
  }

  for (const char* name : {"channel_r", "channel_b"}) {
    if (!root.contains(name)) {
      issues.push_back({std::string("scenario.") + name, "missing"});
    } else {
      parse_channel(root[name], std::string("scenario.") + name, s.dim,
                    name == std::string("channel_r") ? s.channel_r : s.channel_b, issues);
    }
  }

  // mode
  if (!root.contains("mode")) {
    issues.push_back({"scenario.mode", "missing"});
  } else if (root["mode"].is_string() && root["mode"].get<std::string>() == "exact") {
    s.mode = Scenario::Mode::exact;
  } else if (root["mode"].is_object() && root["mode"].contains("sample")) {
    check_keys(root["mode"], "scenario.mode", {"sample"}, issues);
    const json& sm = root["mode"]["sample"];
    if (!sm.is_object()) {
      issues.push_back({"scenario.mode.sample", "must be an object"});
    } else {
      check_keys(sm, "scenario.mode.sample", {"shots", "seed"}, issues);
      s.mode = Scenario::Mode::sample;
      if (!sm.contains("shots") || !sm["shots"].is_number_integer() ||
          sm["shots"].get<std::int64_t>() < 1) {
        issues.push_back({"scenario.mode.sample.shots", "must be a positive integer"});
      } else {
        s.shots = sm["shots"].get<std::int64_t>();
      }
      if (!sm.contains("seed") || !sm["seed"].is_number_integer()) {
        issues.push_back({"scenario.mode.sample.seed", "must be an integer"});
      } else {
        s.seed = sm["seed"].get<std::uint64_t>();
      }
    }
  } else {
    issues.push_back({"scenario.mode", "expected \"exact\" or {\"sample\": {...}}"});
  }

  // accept
  if (root.contains("accept")) {
    const json& acc = root["accept"];
    if (acc.is_string() && acc.get<std::string>() == "all") {
      s.accept = std::nullopt;
    } else if (acc.is_array()) {
      std::vector<OutcomeLabel> labels;
      if (acc.empty()) issues.push_back({"scenario.accept", "accept list must be non-empty"});
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const json& entry = acc[i];
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
            !entry[1].is_number_integer()) {
          issues.push_back(
              {"scenario.accept[" + std::to_string(i) + "]", "entries must be [a, b] pairs"});
          continue;
        }
        const int a = entry[0].get<int>(), b = entry[1].get<int>();
        if (a < 0 || a >= s.dim || b < 0 || b >= s.dim) {
          issues.push_back({"scenario.accept[" + std::to_string(i) + "]",
                            "labels must satisfy 0 <= a,b < dim"});
          continue;
        }
        labels.push_back({a, b});
      }
      s.accept = std::move(labels);
    } else {
      issues.push_back({"scenario.accept", "expected \"all\" or a list of [a, b] pairs"});
    }
  }

  // reports
  if (!root.contains("reports") || !root["reports"].is_array() || root["reports"].empty()) {
    issues.push_back({"scenario.reports", "needs a non-empty list"});
  } else {
    for (std::size_t i = 0; i < root["reports"].size(); ++i) {
      const json& r = root["reports"][i];
      const std::string path = "scenario.reports[" + std::to_string(i) + "]";
      if (r.is_string()) {
        const std::string name = r.get<std::string>();
        if (name == "outcomes") {
          s.reports.outcomes = true;
        } else if (name == "compare") {
          s.reports.compare = true;
        } else if (name == "homogeneity") {
          s.reports.homogeneity = true;
        } else {
          issues.push_back({path, "unknown report \"" + name + "\""});
        }
      } else if (r.is_object() && r.contains("angular")) {
        check_keys(r, path, {"angular"}, issues);
        const json& ang = r["angular"];
        if (!ang.is_object() || !ang.contains("j") || !ang["j"].is_number()) {
          issues.push_back({path + ".angular.j", "missing or not a number"});
          continue;
        }
        check_keys(ang, path + ".angular", {"j"}, issues);
        const double jval = ang["j"].get<double>();
        const int two_j = static_cast<int>(std::llround(2.0 * jval));
        if (two_j < 1 || std::abs(2.0 * jval - two_j) > 1e-9) {
          issues.push_back({path + ".angular.j", "j must be a positive half-integer"});
        } else {
          s.reports.angular_two_j = two_j;
        }
      } else {
        issues.push_back({path, "expected a report name or {\"angular\": {\"j\": ...}}"});
      }
    }
  }

  if (!issues.empty()) return issues;
  return s;
}

PureState scenario_input_state(const Scenario& s) {
  switch (s.input_kind) {
    case Scenario::InputKind::zero:
      return PureState::basis(s.dim, 0);
    case Scenario::InputKind::plus: {
      Vector v = Vector::Constant(s.dim, cxd(1.0 / std::sqrt(static_cast<double>(s.dim)), 0.0));
      return PureState({s.dim}, std::move(v));
    }
    case Scenario::InputKind::haar: {
      Rng rng(s.haar_seed);
      return haar_state(s.dim, rng);
    }
    case Scenario::InputKind::amplitudes:
      return PureState({s.dim}, s.amplitudes);
  }
  throw std::logic_error("scenario_input_state: unreachable");
}

//---------------------------------------------------------------------------
// Rendering
//---------------------------------------------------------------------------

namespace {

ordered_json complex_json(cxd c) { return ordered_json::array({c.real(), c.imag()}); }

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json label_json(OutcomeLabel m) { return ordered_json::array({m.a, m.b}); }

std::string channel_text(const ChannelSpec& spec) {
  char buf[80];
  switch (spec.kind) {
    case ChannelKind::identity:
      return "identity";
    case ChannelKind::dephasing:
      std::snprintf(buf, sizeof(buf), "dephasing(p=%g)", spec.p);
      return buf;
    case ChannelKind::uniform_depolarizing:
      std::snprintf(buf, sizeof(buf), "uniform_depolarizing(p=%g)", spec.p);
      return buf;
    case ChannelKind::weyl:
      return "weyl";
    case ChannelKind::unitary_error:
      std::snprintf(buf, sizeof(buf), "unitary_error(p=%g)", spec.p);
      return buf;
    case ChannelKind::amplitude_damping:
      std::snprintf(buf, sizeof(buf), "amplitude_damping(gamma=%g)", spec.gamma);
      return buf;
    case ChannelKind::custom:
      std::snprintf(buf, sizeof(buf), "custom(%zu Kraus)", spec.kraus.size());
      return buf;
  }
  return "?";
}

ordered_json channel_spec_json(const ChannelSpec& spec) {
  ordered_json out;
  switch (spec.kind) {
    case ChannelKind::identity:
      out["kind"] = "identity";
      break;
    case ChannelKind::dephasing:
      out["kind"] = "dephasing";
      out["p"] = spec.p;
      break;
    case ChannelKind::uniform_depolarizing:
      out["kind"] = "uniform_depolarizing";
      out["p"] = spec.p;
      break;
    case ChannelKind::weyl:
      out["kind"] = "weyl";
      out["weights"] = spec.weights;
      break;
    case ChannelKind::unitary_error:
      out["kind"] = "unitary_error";
      out["p"] = spec.p;
      out["unitary"] = matrix_json(spec.unitary);
      break;
    case ChannelKind::amplitude_damping:
      out["kind"] = "amplitude_damping";
      out["gamma"] = spec.gamma;
      break;
    case ChannelKind::custom: {
      out["kind"] = "custom";
      ordered_json mats = ordered_json::array();
      for (const auto& m : spec.kraus) mats.push_back(matrix_json(m));
      out["kraus"] = std::move(mats);
      break;
    }
  }
  return out;
}

void render_matrix(std::ostringstream& os, const Matrix& m) {
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "(%11.8f,%11.8f) ", m(i, j).real(), m(i, j).imag());
      os << buf;
    }
    os << "\n";
  }
}

const char* verdict_name(CompareVerdict v) {
  switch (v) {
    case CompareVerdict::equal_within_tol:
      return "equal-within-tol";
    case CompareVerdict::teleport_noisier_without_m:
      return "teleport-noisier-without-m";
    case CompareVerdict::mismatch:
      return "mismatch";
  }
  return "?";
}

ordered_json homogeneity_json(const ChannelHomogeneity& h) {
  ordered_json out;
  out["covariant_under_weyl"] = h.covariant_under_weyl;
  out["transpose_homogeneous"] = h.transpose_homogeneous;
  out["predicts_m_independent_outputs"] = h.predicts_m_independent_outputs;
  out["weyl_residual"] = h.weyl.residual;
  out["transpose_residual"] = h.transpose.residual;
  return out;
}

}  // namespace

RunOutput run_scenario(const Scenario& s, const RunOptions& options) {
  RunOutput out;
  std::ostringstream text;
  ordered_json& doc = out.structured;

  const double tol_oracle = options.tol_override.value_or(1e-10);
  const double tol_compare = options.tol_override.value_or(compare_tol);

  const PureState psi = scenario_input_state(s);
  const KrausChannel cr = build_standard_channel(s.channel_r, s.dim);
  const KrausChannel cb = build_standard_channel(s.channel_b, s.dim);
  const BellMeasurement meas = BellMeasurement::standard(s.dim);
  AcceptSet accept = s.accept ? AcceptSet{*s.accept} : AcceptSet::all(s.dim);

  doc["scenario"]["dim"] = s.dim;
  switch (s.input_kind) {
    case Scenario::InputKind::zero:
      doc["scenario"]["input_state"] = "zero";
      break;
    case Scenario::InputKind::plus:
      doc["scenario"]["input_state"] = "plus";
      break;
    case Scenario::InputKind::haar:
      doc["scenario"]["input_state"] = "haar(" + std::to_string(s.haar_seed) + ")";
      break;
    case Scenario::InputKind::amplitudes: {
      ordered_json amps = ordered_json::array();
      for (int i = 0; i < s.dim; ++i) amps.push_back(complex_json(s.amplitudes(i)));
      doc["scenario"]["input_state"] = std::move(amps);
      break;
    }
  }
  doc["scenario"]["channel_r"] = channel_spec_json(s.channel_r);
  doc["scenario"]["channel_b"] = channel_spec_json(s.channel_b);
  if (s.mode == Scenario::Mode::exact) {
    doc["scenario"]["mode"] = "exact";
  } else {
    doc["scenario"]["mode"]["sample"]["shots"] = s.shots;
    doc["scenario"]["mode"]["sample"]["seed"] = s.seed;
  }
  if (s.accept) {
    ordered_json acc = ordered_json::array();
    for (const auto& m : *s.accept) acc.push_back(label_json(m));
    doc["scenario"]["accept"] = std::move(acc);
  } else {
    doc["scenario"]["accept"] = "all";
  }

  text << "telsim scenario: dim=" << s.dim << "  input="
       << doc["scenario"]["input_state"].dump() << "  mode="
       << (s.mode == Scenario::Mode::exact ? "exact" : "sample") << "\n"
       << "channel R: " << channel_text(s.channel_r)
       << "    channel B: " << channel_text(s.channel_b) << "\n";

  bool violation = false;
  char buf[160];

  if (s.reports.outcomes) {
    SimulationResult sim = s.mode == Scenario::Mode::exact
                               ? enumerate_outcomes(psi, cr, cb, meas, accept)
                               : sample_outcomes(psi, cr, cb, meas, accept, s.shots, s.seed);

    double total_prob = 0.0;
    for (const auto& rec : sim.records) total_prob += rec.prob;

    if (s.mode == Scenario::Mode::exact) {
      // Cross-check the enumeration against the effective-error prediction.
      const SimulationResult pred = predict_outcomes_via_eq10(psi, cr, cb, meas, accept);
      double max_dp = 0.0, min_fid = 1.0;
      for (std::size_t i = 0; i < sim.records.size(); ++i) {
        max_dp = std::max(max_dp, std::abs(sim.records[i].prob - pred.records[i].prob));
        if (sim.records[i].prob > 1e-12 && !sim.records[i].null_output &&
            !pred.records[i].null_output) {
          min_fid = std::min(min_fid, fidelity(sim.records[i].output, pred.records[i].output));
        }
      }
      doc["outcomes"]["oracle_check"]["max_probability_gap"] = max_dp;
      doc["outcomes"]["oracle_check"]["min_branch_fidelity"] = min_fid;
      if (max_dp > tol_oracle || min_fid < 1.0 - tol_oracle) {
        violation = true;
        text << "INVARIANT VIOLATION: enumeration and effective-error prediction disagree\n";
      }
      if (std::abs(total_prob - 1.0) > tol_oracle) {
        violation = true;
        text << "INVARIANT VIOLATION: branch probabilities do not sum to 1\n";
      }
    }

    doc["outcomes"]["mode"] = s.mode == Scenario::Mode::exact ? "exact" : "sample";
    doc["outcomes"]["acceptance_probability"] = sim.acceptance_probability;
    doc["outcomes"]["total_probability"] = total_prob;

    text << "\noutcomes";
    if (s.mode == Scenario::Mode::sample) text << " (" << s.shots << " shots)";
    std::snprintf(buf, sizeof(buf), ", acceptance probability %.9f\n",
                  sim.acceptance_probability);
    text << buf;
    text << "    m     probability     fidelity\n";

    ordered_json per_m = ordered_json::array();
    for (const auto& [m, marginal] : sim.per_m_marginals) {
      const double fid = marginal.prob > null_branch_threshold
                             ? fidelity(psi, marginal.state)
                             : 0.0;
      ordered_json entry;
      entry["m"] = label_json(m);
      entry["probability"] = marginal.prob;
      entry["fidelity"] = fid;
      per_m.push_back(std::move(entry));
      std::snprintf(buf, sizeof(buf), "  (%d,%d)   %12.9f   %12.9f\n", m.a, m.b,
                    marginal.prob, fid);
      text << buf;
    }
    doc["outcomes"]["per_m"] = std::move(per_m);
    doc["outcomes"]["averaged_output"] = matrix_json(sim.averaged_output.matrix());
    doc["outcomes"]["premessage_marginal"] = matrix_json(sim.premessage_marginal.matrix());

    ordered_json records = ordered_json::array();
    for (const auto& rec : sim.records) {
      ordered_json r;
      r["m"] = label_json(rec.m);
      r["xr"] = rec.xr;
      r["xb"] = rec.xb;
      r["probability"] = rec.prob;
      r["raw_norm2"] = rec.raw_norm2;
      r["null"] = rec.null_output;
      records.push_back(std::move(r));
    }
    doc["outcomes"]["records"] = std::move(records);

    text << "averaged output:\n";
    render_matrix(text, sim.averaged_output.matrix());
  }

  if (s.reports.compare) {
    ComparisonReport rep = compare_teleport_vs_direct({psi}, cr, cb, meas);
    rep.tol = tol_compare;

    doc["compare"]["verdict"] = verdict_name(rep.verdict);
    doc["compare"]["avg_fidelity_teleport"] = rep.avg_fidelity_teleport;
    doc["compare"]["avg_fidelity_direct"] = rep.avg_fidelity_direct;
    doc["compare"]["entanglement_fidelity_teleport"] = rep.entanglement_fidelity_teleport;
    doc["compare"]["entanglement_fidelity_direct"] = rep.entanglement_fidelity_direct;
    doc["compare"]["max_matched_gap"] = rep.max_matched_gap;
    doc["compare"]["m_blind_gap"] = rep.m_blind_gap;
    doc["compare"]["transposition_gap"] = rep.transposition_gap;
    doc["compare"]["transposed_channel_trace_preserving"] =
        rep.transposed_channel_trace_preserving;
    doc["compare"]["input_fidelity_teleport"] = rep.input_fidelity_teleport;
    doc["compare"]["input_fidelity_direct_matched"] = rep.input_fidelity_direct_matched;
    doc["compare"]["input_fidelity_direct_plain"] = rep.input_fidelity_direct_plain;
    doc["compare"]["input_fidelity_direct_nontransposed"] =
        rep.input_fidelity_direct_nontransposed;
    ordered_json per_m = ordered_json::array();
    for (const auto& [m, fid] : rep.per_m_fidelity) {
      ordered_json entry;
      entry["m"] = label_json(m);
      entry["fidelity"] = fid;
      per_m.push_back(std::move(entry));
    }
    doc["compare"]["per_m_fidelity"] = std::move(per_m);

    text << "\nteleport vs direct transmission\n";
    std::snprintf(buf, sizeof(buf), "  avg fidelity      teleport %.12f   direct %.12f\n",
                  rep.avg_fidelity_teleport, rep.avg_fidelity_direct);
    text << buf;
    std::snprintf(buf, sizeof(buf), "  entanglement fid  teleport %.12f   direct %.12f\n",
                  rep.entanglement_fidelity_teleport, rep.entanglement_fidelity_direct);
    text << buf;
    std::snprintf(buf, sizeof(buf),
                  "  matched gap %.3e   m-blind gap %.3e   transposition gap %.3e\n",
                  rep.max_matched_gap, rep.m_blind_gap, rep.transposition_gap);
    text << buf;
    if (!rep.transposed_channel_trace_preserving) {
      text << "  warning: transposed R channel is not trace preserving\n";
    }
    text << "  verdict: " << verdict_name(rep.verdict) << "\n";
    if (rep.verdict == CompareVerdict::mismatch) {
      violation = true;
      text << "INVARIANT VIOLATION: teleport/direct comparison mismatch\n";
    }
  }

  if (s.reports.homogeneity) {
    const ChannelHomogeneity hr = homogeneity_report(cr, meas);
    const ChannelHomogeneity hb = homogeneity_report(cb, meas);
    doc["homogeneity"]["channel_r"] = homogeneity_json(hr);
    doc["homogeneity"]["channel_b"] = homogeneity_json(hb);

    auto line = [&](const char* name, const ChannelHomogeneity& h) {
      std::snprintf(buf, sizeof(buf),
                    "  %s: weyl-covariant=%s transpose-homogeneous=%s (m-independent: %s)\n",
                    name, h.covariant_under_weyl ? "yes" : "no",
                    h.transpose_homogeneous ? "yes" : "no",
                    h.predicts_m_independent_outputs ? "yes" : "no");
      text << buf;
    };
    text << "\nhomogeneity\n";
    line("channel R", hr);
    line("channel B", hb);
  }

  if (s.reports.angular_two_j) {
    const AngularMomentumReport rep = angular_momentum_transpose_report(*s.reports.angular_two_j);
    const double jval = rep.two_j / 2.0;
    doc["angular"]["j"] = jval;
    doc["angular"]["norm_lx_transpose_minus_lx"] = rep.norm_lx_transpose_minus_lx;
    doc["angular"]["norm_ly_transpose_plus_ly"] = rep.norm_ly_transpose_plus_ly;
    doc["angular"]["norm_lz_transpose_minus_lz"] = rep.norm_lz_transpose_minus_lz;

    text << "\nangular momentum transposition (j=" << jval << ")\n";
    std::snprintf(buf, sizeof(buf), "  |lx^T - lx| = %.3e\n  |ly^T + ly| = %.3e\n  |lz^T - lz| = %.3e\n",
                  rep.norm_lx_transpose_minus_lx, rep.norm_ly_transpose_plus_ly,
                  rep.norm_lz_transpose_minus_lz);
    text << buf;
  }

  out.exit_code = violation ? 2 : 0;
  out.table_text = text.str();
  return out;
}

}  // namespace telsim
