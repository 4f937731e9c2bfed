#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/evolution.hpp>
#include <pauliprobe/generate.hpp>
#include <pauliprobe/learner.hpp>
#include <pauliprobe/oracle.hpp>
#include <pauliprobe/serialize.hpp>
#include <pauliprobe/tester.hpp>

using namespace pauliprobe;

namespace {

// Bitwise spectrum equality: serialization must be lossless, not just close.
void require_identical(const PauliSpectrum& a, const PauliSpectrum& b) {
  REQUIRE(a.n() == b.n());
  REQUIRE(a.size() == b.size());
  auto ib = b.begin();
  for (const auto& [x, coeff] : a) {
    REQUIRE(x.index() == ib->first.index());
    REQUIRE(coeff.real() == ib->second.real());
    REQUIRE(coeff.imag() == ib->second.imag());
    ++ib;
  }
}

PauliSpectrum two_term_spectrum() {
  return PauliSpectrum(
      2, {{PauliString::from_word("XX"), cplx(0.6, 0.0)},
          {PauliString::from_word("ZI"), cplx(0.8, 0.0)}});
}

}  // namespace

TEST_CASE("spectrum JSON has the documented shape and fixed bytes", "[serialize]") {
  json j = to_json(two_term_spectrum());
  REQUIRE(j.at("n") == 2);
  REQUIRE(j.at("coeffs").size() == 2);
  REQUIRE(j.at("coeffs")[0].at("word") == "XX");
  REQUIRE(j.at("coeffs")[0].at("re") == 0.6);
  REQUIRE(j.at("coeffs")[0].at("im") == 0.0);
  REQUIRE(j.at("coeffs")[1].at("word") == "ZI");
  // Keys print sorted and doubles print with shortest round-trip form, so a
  // given spectrum always dumps to the same bytes.
  REQUIRE(j.dump() ==
          R"({"coeffs":[{"im":0.0,"re":0.6,"word":"XX"},)"
          R"({"im":0.0,"re":0.8,"word":"ZI"}],"n":2})");
}

TEST_CASE("spectrum JSON round-trips random draws bitwise", "[serialize]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PauliSpectrum s = random_k_local(4, 2, 0.5, seed).spectrum();
    PauliSpectrum back = spectrum_from_json(json::parse(to_json(s).dump()));
    require_identical(s, back);
  }
  // Empty spectra survive too.
  PauliSpectrum zero(3);
  require_identical(zero, spectrum_from_json(json::parse(to_json(zero).dump())));
}

TEST_CASE("spectrum parser rejects inconsistent documents", "[serialize]") {
  json j = json::parse(R"({"n": 3, "coeffs": [{"word": "XX", "re": 1.0, "im": 0.0}]})");
  REQUIRE_THROWS_AS(spectrum_from_json(j), ConfigError);
  REQUIRE_THROWS_AS(spectrum_from_json(json::parse(R"({"coeffs": []})")),
                    json::exception);
}

TEST_CASE("planted instances round-trip with label and locality", "[serialize]") {
  // A Close instance at eps1 = 0 is exactly k-local, so it carries a declared
  // locality; a Far instance never does.
  PlantedInstance close =
      planted_instance(3, 1, 0.0, 0.3, InstanceLabel::Close, 11);
  PlantedInstance far = planted_instance(3, 1, 0.0, 0.3, InstanceLabel::Far, 12);

  for (const PlantedInstance* inst : {&close, &far}) {
    json j = to_json(*inst);
    PlantedInstance back = instance_from_json(json::parse(j.dump()));
    require_identical(inst->hamiltonian.spectrum(), back.hamiltonian.spectrum());
    REQUIRE(back.exact_tail == inst->exact_tail);
    REQUIRE(back.label == inst->label);
    REQUIRE(back.k == inst->k);
    REQUIRE(back.eps1 == inst->eps1);
    REQUIRE(back.eps2 == inst->eps2);
    REQUIRE(back.seed == inst->seed);
    REQUIRE(back.hamiltonian.locality() == inst->hamiltonian.locality());
    REQUIRE(back.hamiltonian.normalized() == inst->hamiltonian.normalized());
  }
  REQUIRE(to_json(close).at("locality") == 1);
  REQUIRE(to_json(far).at("locality").is_null());
  REQUIRE(to_json(close).at("label") == "close");
  REQUIRE(to_json(far).at("label") == "far");
}

TEST_CASE("instance parser accepts minimal documents and rejects bad labels",
          "[serialize]") {
  json minimal = json::parse(R"({
    "n": 1,
    "coeffs": [{"word": "Z", "re": 0.5, "im": 0.0}],
    "exact_tail": 0.0, "label": "close", "k": 1, "seed": 7
  })");
  PlantedInstance inst = instance_from_json(minimal);
  REQUIRE(inst.eps1 == 0.0);
  REQUIRE(inst.eps2 == 0.0);
  REQUIRE_FALSE(inst.hamiltonian.locality().has_value());
  REQUIRE_FALSE(inst.hamiltonian.normalized());

  minimal["label"] = "borderline";
  REQUIRE_THROWS_AS(instance_from_json(minimal), ConfigError);
}

TEST_CASE("unitary spectra round-trip; the source pointer does not",
          "[serialize]") {
  Hamiltonian h(two_term_spectrum(), 2, true);
  UnitarySpectrum u = unitary_spectrum(h, 0.3);
  REQUIRE(u.source != nullptr);

  json j = to_json(u);
  REQUIRE(j.at("t") == 0.3);
  UnitarySpectrum back = unitary_from_json(json::parse(j.dump()));
  REQUIRE(back.t == 0.3);
  REQUIRE(back.source == nullptr);
  require_identical(u.spectrum, back.spectrum);
}

TEST_CASE("query ledgers round-trip exactly", "[serialize]") {
  QueryLedger ledger;
  ledger.queries = 123456789012345ull;
  ledger.evolution_time = 0.1 + 0.2;  // deliberately non-representable sum
  QueryLedger back = ledger_from_json(json::parse(to_json(ledger).dump()));
  REQUIRE(back.queries == ledger.queries);
  REQUIRE(back.evolution_time == ledger.evolution_time);
}

TEST_CASE("tester plans and verdicts round-trip every field", "[serialize]") {
  TesterPlan plan = compute_plan(0.0, 0.3, 1.0 / 3.0, 1);
  TesterPlan p = tester_plan_from_json(json::parse(to_json(plan).dump()));
  REQUIRE(p.eps1 == plan.eps1);
  REQUIRE(p.eps2 == plan.eps2);
  REQUIRE(p.delta == plan.delta);
  REQUIRE(p.k == plan.k);
  REQUIRE(p.c == plan.c);
  REQUIRE(p.alpha == plan.alpha);
  REQUIRE(p.low_bound == plan.low_bound);
  REQUIRE(p.high_bound == plan.high_bound);
  REQUIRE(p.threshold == plan.threshold);
  REQUIRE(p.tau == plan.tau);
  REQUIRE(p.m_samples_exact == plan.m_samples_exact);
  REQUIRE(p.m_samples == plan.m_samples);
  REQUIRE(p.error_target == plan.error_target);

  TestVerdict v{Decision::FarFromLocal, 0.125, 100000, plan,
                QueryLedger{100000, 10000.0}, 42};
  TestVerdict back = verdict_from_json(json::parse(to_json(v).dump()));
  REQUIRE(back.decision == Decision::FarFromLocal);
  REQUIRE(back.estimated_tail_mass == v.estimated_tail_mass);
  REQUIRE(back.samples_used == v.samples_used);
  REQUIRE(back.plan.m_samples == plan.m_samples);
  REQUIRE(back.ledger.queries == v.ledger.queries);
  REQUIRE(back.ledger.evolution_time == v.ledger.evolution_time);
  REQUIRE(back.seed == 42);

  REQUIRE(to_json(v).at("decision") == "far_from_local");
  REQUIRE_THROWS_AS(decision_from_string("maybe"), ConfigError);
}

TEST_CASE("learner plans round-trip in both modes", "[serialize]") {
  for (LearnerPlan plan :
       {theory_parameters(1, 0.5, 1.0 / 3.0, 2.0),
        practical_parameters(1, 0.2, 1.0 / 3.0, 3.0, 1.0, 0.2, 0.02, 0.005,
                             100000)}) {
    LearnerPlan p = learner_plan_from_json(json::parse(to_json(plan).dump()));
    REQUIRE(p.k == plan.k);
    REQUIRE(p.eps == plan.eps);
    REQUIRE(p.delta == plan.delta);
    REQUIRE(p.C == plan.C);
    REQUIRE(p.c == plan.c);
    REQUIRE(p.mode == plan.mode);
    REQUIRE(p.alpha == plan.alpha);
    REQUIRE(p.gamma == plan.gamma);
    REQUIRE(p.beta == plan.beta);
    REQUIRE(p.m1_exact == plan.m1_exact);
    REQUIRE(p.m1 == plan.m1);
    REQUIRE(p.theory_alpha == plan.theory_alpha);
    REQUIRE(p.theory_gamma == plan.theory_gamma);
    REQUIRE(p.theory_beta == plan.theory_beta);
    REQUIRE(p.theory_m1 == plan.theory_m1);
  }
  REQUIRE(to_json(theory_parameters(1, 0.5, 1.0 / 3.0, 2.0)).at("mode") ==
          "theory");
  REQUIRE_THROWS_AS(plan_mode_from_string("empirical"), ConfigError);
}

TEST_CASE("learned-Hamiltonian reports carry every audit field", "[serialize]") {
  Hamiltonian target(
      PauliSpectrum(1, {{PauliString::from_word("Z"), cplx(0.5, 0.0)}}), 1,
      false);
  EvolutionOracle oracle(target, 321);
  LearnerPlan plan =
      practical_parameters(1, 0.2, 1.0 / 3.0, 3.0, 1.0, 0.2, 0.02, 0.05, 2000);
  LearnedHamiltonian learned = learn(oracle, plan);

  json j = to_json(learned);
  REQUIRE(j.at("n") == 1);
  REQUIRE(j.at("support") == json::array({"Z"}));
  REQUIRE(j.at("plan").at("mode") == "practical");
  REQUIRE(j.at("plan").at("m1") == 2000);
  REQUIRE(j.at("error_budget").at("term_I").is_number());
  REQUIRE(j.at("error_budget").at("term_II").is_number());
  REQUIRE(j.at("error_budget").at("term_I").get<double>() ==
          learned.budget.term_I);
  REQUIRE(j.at("ledger").at("queries").get<std::uint64_t>() ==
          learned.ledger.queries);
  REQUIRE(j.at("seed") == 321);
  // The coefficients block parses back as a plain spectrum.
  require_identical(learned.coefficients, spectrum_from_json(j));
}
