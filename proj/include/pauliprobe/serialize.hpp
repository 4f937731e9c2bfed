#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/evolution.hpp>
#include <pauliprobe/generate.hpp>
#include <pauliprobe/hamiltonian.hpp>
#include <pauliprobe/learner.hpp>
#include <pauliprobe/oracle.hpp>
#include <pauliprobe/pauli.hpp>
#include <pauliprobe/tester.hpp>

/**
 * JSON input/output for every value the command-line tools read or write.
 *
 * Conventions:
 *  - a spectrum is {"n": int, "coeffs": [{"word": "XZ..", "re": r, "im": i}]},
 *    and richer records extend that object with further keys;
 *  - writers emit every field; parsers require the core fields with .at()
 *    and give benign defaults to the metadata extras, so minimal
 *    hand-written inputs stay valid;
 *  - nlohmann::json stores object keys sorted and prints doubles with the
 *    shortest representation that parses back to the same bits, so equal
 *    values serialize to equal bytes and round-trips are lossless;
 *  - malformed documents surface as nlohmann::json::exception; values that
 *    parse but make no sense (bad label, word length vs n) throw ConfigError.
 */
namespace pauliprobe {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Pauli spectra
// ---------------------------------------------------------------------------

inline json to_json(const PauliSpectrum& s) {
  json coeffs = json::array();
  for (const auto& [x, a] : s)
    coeffs.push_back(json{{"word", x.word()}, {"re", a.real()}, {"im", a.imag()}});
  return json{{"coeffs", std::move(coeffs)}, {"n", s.n()}};
}

inline PauliSpectrum spectrum_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  std::vector<PauliSpectrum::Entry> entries;
  entries.reserve(j.at("coeffs").size());
  for (const auto& c : j.at("coeffs")) {
    PauliString x = PauliString::from_word(c.at("word").get<std::string>());
    if (x.n() != n)
      throw ConfigError("spectrum_from_json: word \"" + x.word() +
                        "\" does not match n = " + std::to_string(n));
    entries.emplace_back(std::move(x),
                         cplx(c.at("re").get<double>(), c.at("im").get<double>()));
  }
  return PauliSpectrum(n, std::move(entries));
}

// ---------------------------------------------------------------------------
// Generated benchmark instances
// ---------------------------------------------------------------------------

inline InstanceLabel label_from_string(std::string_view s) {
  if (s == "close") return InstanceLabel::Close;
  if (s == "far") return InstanceLabel::Far;
  throw ConfigError("label_from_string: expected \"close\" or \"far\", got \"" +
                    std::string(s) + "\"");
}

inline json to_json(const PlantedInstance& inst) {
  json j = to_json(inst.hamiltonian.spectrum());
  j["exact_tail"] = inst.exact_tail;
  j["label"] = to_string(inst.label);
  j["k"] = inst.k;
  j["eps1"] = inst.eps1;
  j["eps2"] = inst.eps2;
  j["seed"] = inst.seed;
  // Declared locality is part of the Hamiltonian's identity: generated Close
  // instances at eps1 = 0 declare it, everything else carries null.
  if (std::optional<int> loc = inst.hamiltonian.locality(); loc.has_value())
    j["locality"] = *loc;
  else
    j["locality"] = nullptr;
  j["normalized"] = inst.hamiltonian.normalized();
  return j;
}

inline PlantedInstance instance_from_json(const json& j) {
  PauliSpectrum s = spectrum_from_json(j);
  std::optional<int> locality;
  if (j.contains("locality") && !j.at("locality").is_null())
    locality = j.at("locality").get<int>();
  const bool normalized = j.value("normalized", false);
  return PlantedInstance{Hamiltonian(std::move(s), locality, normalized),
                         j.at("exact_tail").get<double>(),
                         label_from_string(j.at("label").get<std::string>()),
                         j.at("k").get<int>(),
                         j.value("eps1", 0.0),
                         j.value("eps2", 0.0),
                         j.at("seed").get<std::uint64_t>()};
}

// ---------------------------------------------------------------------------
// Evolved-unitary spectra
// ---------------------------------------------------------------------------

inline json to_json(const UnitarySpectrum& u) {
  json j = to_json(u.spectrum);
  j["t"] = u.t;
  return j;
}

/// The in-memory source pointer is a convenience for callers that still hold
/// the generating Hamiltonian; it does not survive serialization.
inline UnitarySpectrum unitary_from_json(const json& j) {
  return UnitarySpectrum{spectrum_from_json(j), j.at("t").get<double>(), nullptr};
}

// ---------------------------------------------------------------------------
// Query accounting
// ---------------------------------------------------------------------------

inline json to_json(const QueryLedger& ledger) {
  return json{{"evolution_time", ledger.evolution_time},
              {"queries", ledger.queries}};
}

inline QueryLedger ledger_from_json(const json& j) {
  QueryLedger ledger;
  ledger.queries = j.at("queries").get<std::uint64_t>();
  ledger.evolution_time = j.at("evolution_time").get<double>();
  return ledger;
}

// ---------------------------------------------------------------------------
// Tester plans and verdicts
// ---------------------------------------------------------------------------

inline json to_json(const TesterPlan& p) {
  return json{{"alpha", p.alpha},
              {"c", p.c},
              {"delta", p.delta},
              {"eps1", p.eps1},
              {"eps2", p.eps2},
              {"error_target", p.error_target},
              {"high_bound", p.high_bound},
              {"k", p.k},
              {"low_bound", p.low_bound},
              {"m_samples", p.m_samples},
              {"m_samples_exact", p.m_samples_exact},
              {"tau", p.tau},
              {"threshold", p.threshold}};
}

inline TesterPlan tester_plan_from_json(const json& j) {
  TesterPlan p;
  p.eps1 = j.at("eps1").get<double>();
  p.eps2 = j.at("eps2").get<double>();
  p.delta = j.at("delta").get<double>();
  p.k = j.at("k").get<int>();
  p.c = j.at("c").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.low_bound = j.at("low_bound").get<double>();
  p.high_bound = j.at("high_bound").get<double>();
  p.threshold = j.at("threshold").get<double>();
  p.tau = j.at("tau").get<double>();
  p.m_samples_exact = j.at("m_samples_exact").get<double>();
  p.m_samples = j.at("m_samples").get<std::uint64_t>();
  p.error_target = j.at("error_target").get<double>();
  return p;
}

inline Decision decision_from_string(std::string_view s) {
  if (s == "close_to_local") return Decision::CloseToLocal;
  if (s == "far_from_local") return Decision::FarFromLocal;
  throw ConfigError(
      "decision_from_string: expected \"close_to_local\" or "
      "\"far_from_local\", got \"" +
      std::string(s) + "\"");
}

inline json to_json(const TestVerdict& v) {
  return json{{"decision", to_string(v.decision)},
              {"estimated_tail_mass", v.estimated_tail_mass},
              {"ledger", to_json(v.ledger)},
              {"plan", to_json(v.plan)},
              {"samples_used", v.samples_used},
              {"seed", v.seed}};
}

inline TestVerdict verdict_from_json(const json& j) {
  return TestVerdict{decision_from_string(j.at("decision").get<std::string>()),
                     j.at("estimated_tail_mass").get<double>(),
                     j.at("samples_used").get<std::uint64_t>(),
                     tester_plan_from_json(j.at("plan")),
                     ledger_from_json(j.at("ledger")),
                     j.at("seed").get<std::uint64_t>()};
}

// ---------------------------------------------------------------------------
// Learner plans and results
// ---------------------------------------------------------------------------

inline PlanMode plan_mode_from_string(std::string_view s) {
  if (s == "theory") return PlanMode::Theory;
  if (s == "practical") return PlanMode::Practical;
  throw ConfigError(
      "plan_mode_from_string: expected \"theory\" or \"practical\", got \"" +
      std::string(s) + "\"");
}

inline json to_json(const LearnerPlan& p) {
  return json{{"C", p.C},
              {"alpha", p.alpha},
              {"beta", p.beta},
              {"c", p.c},
              {"delta", p.delta},
              {"eps", p.eps},
              {"gamma", p.gamma},
              {"k", p.k},
              {"m1", p.m1},
              {"m1_exact", p.m1_exact},
              {"mode", to_string(p.mode)},
              {"theory_alpha", p.theory_alpha},
              {"theory_beta", p.theory_beta},
              {"theory_gamma", p.theory_gamma},
              {"theory_m1", p.theory_m1}};
}

inline LearnerPlan learner_plan_from_json(const json& j) {
  LearnerPlan p;
  p.k = j.at("k").get<int>();
  p.eps = j.at("eps").get<double>();
  p.delta = j.at("delta").get<double>();
  p.C = j.at("C").get<double>();
  p.c = j.at("c").get<double>();
  p.mode = plan_mode_from_string(j.at("mode").get<std::string>());
  p.alpha = j.at("alpha").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.beta = j.at("beta").get<double>();
  p.m1_exact = j.at("m1_exact").get<double>();
  p.m1 = j.at("m1").get<std::uint64_t>();
  p.theory_alpha = j.at("theory_alpha").get<double>();
  p.theory_gamma = j.at("theory_gamma").get<double>();
  p.theory_beta = j.at("theory_beta").get<double>();
  p.theory_m1 = j.at("theory_m1").get<double>();
  return p;
}

inline json to_json(const ErrorBudget& b) {
  return json{{"term_I", b.term_I}, {"term_II", b.term_II}};
}

inline ErrorBudget error_budget_from_json(const json& j) {
  ErrorBudget b;
  b.term_I = j.at("term_I").get<double>();
  b.term_II = j.at("term_II").get<double>();
  return b;
}

/// Report format for a completed learning run: the recovered spectrum plus
/// the detected support, the plan, the a-priori error budget, the query
/// ledger, and the oracle seed. This is a one-way report — the raw stage
/// outputs (detection amplitudes, complex estimates) stay in memory.
inline json to_json(const LearnedHamiltonian& learned) {
  json j = to_json(learned.coefficients);
  json support = json::array();
  for (const PauliString& x : learned.detection.support) support.push_back(x.word());
  j["support"] = std::move(support);
  j["plan"] = to_json(learned.plan);
  j["error_budget"] = to_json(learned.budget);
  j["ledger"] = to_json(learned.ledger);
  j["seed"] = learned.seed;
  return j;
}

}  // namespace pauliprobe
