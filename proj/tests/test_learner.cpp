#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include <pauliprobe/evolution.hpp>
#include <pauliprobe/generate.hpp>
#include <pauliprobe/learner.hpp>

#include "test_helpers.hpp"

using namespace pauliprobe;

namespace {

// 0.6 XX + 0.8 ZI: the two terms anticommute, so H^2 = Id, the operator
// norm is exactly 1, and U(t) = cos(t) Id - i sin(t) H has no support
// beyond these three strings — detection and estimation have exact ground
// truth: u_0 = cos t, u_XX = -0.6 i sin t, u_ZI = -0.8 i sin t.
Hamiltonian two_term_h() {
  return Hamiltonian(
      PauliSpectrum(2, {{PauliString::from_word("XX"), cplx(0.6, 0.0)},
                        {PauliString::from_word("ZI"), cplx(0.8, 0.0)}}),
      2, true);
}

Hamiltonian half_z() {
  return Hamiltonian(
      PauliSpectrum(1, {{PauliString::from_word("Z"), cplx(0.5, 0.0)}}), 1);
}

LearnerPlan practical_k1(std::uint64_t m1 = 100000) {
  return practical_parameters(1, 0.2, 1.0 / 3.0, 3.0, 1.0, 0.2, 0.02, 0.005, m1);
}

}  // namespace

TEST_CASE("theory_parameters reproduces the worked parameter sets", "[learner]") {
  SECTION("k = 1") {
    LearnerPlan plan = theory_parameters(1, 0.5, 1.0 / 3.0, 2.0);
    REQUIRE(plan.mode == PlanMode::Theory);
    REQUIRE(plan.alpha == 0.125);        // 0.5^2 * 2^-1, exact in binary
    REQUIRE(plan.gamma == 0.015625);     // alpha^2
    REQUIRE(plan.beta == 0.0009765625);  // alpha^3 * eps
    // ceil(2 ln 6 / gamma^4), frozen from an independent evaluation.
    REQUIRE(plan.m1 == 60121472);
    REQUIRE(plan.theory_alpha == plan.alpha);
    REQUIRE(plan.theory_gamma == plan.gamma);
    REQUIRE(plan.theory_beta == plan.beta);
    REQUIRE(plan.theory_m1 == plan.m1_exact);
  }
  SECTION("k = 2 is plannable even though it is not runnable") {
    LearnerPlan plan = theory_parameters(2, 0.5, 1.0 / 3.0, 2.0);
    REQUIRE(plan.alpha == 0.015625);  // 0.5^3 * 2^-3
    REQUIRE(plan.gamma == 0.000244140625);
    REQUIRE(plan.beta == 1.9073486328125e-06);
    // ~1.0087e15 stage-1 samples: representable, reportable, not runnable.
    REQUIRE(plan.m1_exact == 1008670909744129.0);
    REQUIRE(plan.m1 == 1008670909744129ull);
  }
  SECTION("definitional identities hold in theory mode") {
    for (int k = 1; k <= 3; ++k) {
      LearnerPlan plan = theory_parameters(k, 0.3, 0.1, 3.0);
      REQUIRE(plan.gamma == plan.alpha * plan.alpha);
      REQUIRE(plan.beta == plan.alpha * plan.alpha * plan.alpha * 0.3);
    }
  }
}

TEST_CASE("learner plan validation", "[learner]") {
  REQUIRE_THROWS_AS(theory_parameters(0, 0.5, 0.1, 2.0), ConfigError);
  REQUIRE_THROWS_AS(theory_parameters(1, 0.0, 0.1, 2.0), ConfigError);
  REQUIRE_THROWS_AS(theory_parameters(1, 1.0, 0.1, 2.0), ConfigError);
  REQUIRE_THROWS_AS(theory_parameters(1, 0.5, 0.0, 2.0), ConfigError);
  REQUIRE_THROWS_AS(theory_parameters(1, 0.5, 1.0, 2.0), ConfigError);
  REQUIRE_THROWS_AS(theory_parameters(1, 0.5, 0.1, 1.0), ConfigError);
  REQUIRE_THROWS_AS(theory_parameters(1, 0.5, 0.1, 2.0, 0.0), ConfigError);
  // eps near 1 with C near 1 pushes alpha past the Taylor ceiling.
  REQUIRE_THROWS_AS(theory_parameters(1, 0.99, 0.1, 1.1), PlanInfeasible);

  REQUIRE_NOTHROW(practical_k1());
  REQUIRE_THROWS_AS(
      practical_parameters(1, 0.2, 0.1, 3.0, 1.0, 0.6, 0.02, 0.005, 1000),
      PlanInfeasible);
  REQUIRE_THROWS_AS(
      practical_parameters(1, 0.2, 0.1, 3.0, 1.0, 0.2, 0.0, 0.005, 1000),
      ConfigError);
  REQUIRE_THROWS_AS(
      practical_parameters(1, 0.2, 0.1, 3.0, 1.0, 0.2, 0.02, 0.0, 1000),
      ConfigError);
  REQUIRE_THROWS_AS(
      practical_parameters(1, 0.2, 0.1, 3.0, 1.0, 0.2, 0.02, 2.5, 1000),
      ConfigError);
  REQUIRE_THROWS_AS(
      practical_parameters(1, 0.2, 0.1, 3.0, 1.0, 0.2, 0.02, 0.005, 0),
      ConfigError);
}

TEST_CASE("practical plans carry the theory values for reporting", "[learner]") {
  LearnerPlan plan = practical_k1();
  REQUIRE(plan.mode == PlanMode::Practical);
  REQUIRE(plan.alpha == 0.2);
  REQUIRE(plan.gamma == 0.02);
  REQUIRE(plan.beta == 0.005);
  REQUIRE(plan.m1 == 100000);
  LearnerPlan theory = theory_parameters(1, 0.2, 1.0 / 3.0, 3.0);
  REQUIRE(plan.theory_alpha == theory.alpha);
  REQUIRE(plan.theory_gamma == theory.gamma);
  REQUIRE(plan.theory_beta == theory.beta);
  REQUIRE(plan.theory_m1 == theory.m1_exact);
}

TEST_CASE("detect_big_coefficients finds exactly the supported strings",
          "[learner]") {
  SECTION("anticommuting pair: support is exact at modest m1") {
    LearnerPlan plan = practical_k1(10000);
    EvolutionOracle oracle(two_term_h(), 77);
    DetectionResult det = detect_big_coefficients(oracle, plan);
    REQUIRE(det.m1 == 10000);
    REQUIRE(det.support.size() == 2);
    REQUIRE(det.support[0] == PauliString::from_word("XX"));
    REQUIRE(det.support[1] == PauliString::from_word("ZI"));
    REQUIRE(oracle.ledger().queries == 10000);
    REQUIRE(oracle.ledger().evolution_time ==
            Catch::Approx(10000 * 0.2).margin(1e-9));
    // |u_XX| = 0.6 sin 0.2, |u_ZI| = 0.8 sin 0.2; u' estimates them from
    // 10^4 shots, so a 0.02 window is generous.
    for (const auto& [p, amp] : det.amplitudes) {
      if (p == PauliString::from_word("XX"))
        REQUIRE(amp == Catch::Approx(0.11920159847703672).margin(0.02));
      if (p == PauliString::from_word("ZI"))
        REQUIRE(amp == Catch::Approx(0.158935464636049).margin(0.02));
    }
    REQUIRE(static_cast<double>(det.support.size()) <=
            1.0 / (plan.gamma * plan.gamma));
  }
  SECTION("single-qubit example: Z is detected at gamma = 0.05") {
    LearnerPlan plan =
        practical_parameters(1, 0.2, 1.0 / 3.0, 3.0, 1.0, 0.2, 0.05, 0.005, 10000);
    EvolutionOracle oracle(
        Hamiltonian(PauliSpectrum(1, {{PauliString::from_word("Z"),
                                       cplx(0.8, 0.0)}}),
                    1),
        5);
    DetectionResult det = detect_big_coefficients(oracle, plan);
    REQUIRE(det.support == std::vector<PauliString>{PauliString::from_word("Z")});
  }
  SECTION("zero Hamiltonian: everything lands on the excluded identity") {
    LearnerPlan plan = practical_k1(2000);
    EvolutionOracle oracle(Hamiltonian(PauliSpectrum(2)), 9);
    DetectionResult det = detect_big_coefficients(oracle, plan);
    REQUIRE(det.support.empty());
    REQUIRE(det.amplitudes.size() == 1);
    REQUIRE(det.amplitudes[0].first.is_identity());
    REQUIRE(det.amplitudes[0].second == 1.0);  // sqrt(m1 / m1)
  }
}

TEST_CASE("estimate_big_coefficients", "[learner]") {
  LearnerPlan plan = practical_k1(10000);
  EvolutionOracle oracle(two_term_h(), 123);
  DetectionResult det = detect_big_coefficients(oracle, plan);
  REQUIRE(det.support.size() == 2);
  std::uint64_t after_stage1 = oracle.ledger().queries;

  CoefficientEstimates est = estimate_big_coefficients(oracle, plan, det);
  SECTION("keys are exactly the support plus the identity, in string order") {
    REQUIRE(est.estimates.size() == 3);
    REQUIRE(est.estimates[0].first.is_identity());
    REQUIRE(est.estimates[1].first == PauliString::from_word("XX"));
    REQUIRE(est.estimates[2].first == PauliString::from_word("ZI"));
    REQUIRE(est.beta == plan.beta);
    REQUIRE(est.delta_each == plan.delta / 6.0);  // delta / (2 (|S| + 1))
  }
  SECTION("estimates are beta-accurate against the exact values") {
    REQUIRE(std::abs(est.estimates[0].second - cplx(std::cos(0.2), 0.0)) <=
            plan.beta);
    REQUIRE(std::abs(est.estimates[1].second -
                     cplx(0.0, -0.6 * std::sin(0.2))) <= plan.beta);
    REQUIRE(std::abs(est.estimates[2].second -
                     cplx(0.0, -0.8 * std::sin(0.2))) <= plan.beta);
  }
  SECTION("the ledger meters 2 m2 queries per coefficient") {
    auto m2 = static_cast<std::uint64_t>(std::ceil(
        4.0 * std::log(4.0 / est.delta_each) / (plan.beta * plan.beta)));
    REQUIRE(oracle.ledger().queries - after_stage1 == 3 * 2 * m2);
  }
}

TEST_CASE("error budget matches the closed forms", "[learner]") {
  ErrorBudget b = error_budget(practical_k1());
  // 2 c^2 a^2 + 2 a^-2 b^2 (g^-2 + 1) and (2 g / a + c a)^(2/(k+1)) C^k at
  // (a, g, b) = (0.2, 0.02, 0.005), C = 3, c = 1, k = 1; frozen from an
  // independent evaluation.
  REQUIRE(b.term_I == Catch::Approx(3.2062499999999994).margin(1e-12));
  REQUIRE(b.term_II == Catch::Approx(1.2000000000000002).margin(1e-12));
  REQUIRE(b.total() == b.term_I + b.term_II);
}

TEST_CASE("learn recovers a single-qubit Hamiltonian", "[learner]") {
  LearnerPlan plan = practical_k1();
  Hamiltonian target = half_z();
  int hits = 0;
  const int trials = 50;
  for (int i = 0; i < trials; ++i) {
    EvolutionOracle oracle(target,
                           derive_seed(900, static_cast<std::uint64_t>(i)));
    LearnedHamiltonian out = learn(oracle, plan);
    double dist = two_norm_distance(target.spectrum(), out.coefficients);
    INFO("trial " << i << " distance " << dist);
    // Structural invariants hold on every trial, successful or not.
    REQUIRE(static_cast<double>(out.coefficients.size()) <=
            1.0 / (plan.gamma * plan.gamma) + 1.0);
    for (const auto& [p, a] : out.coefficients) REQUIRE(a.imag() == 0.0);
    if (dist <= 0.1) {
      ++hits;
      REQUIRE(dist * dist <= out.budget.term_I + out.budget.term_II);
    }
  }
  REQUIRE(hits >= 45);
}

TEST_CASE("learn on the zero Hamiltonian returns near-zero output",
          "[learner]") {
  LearnerPlan plan = practical_k1(20000);
  EvolutionOracle oracle(Hamiltonian(PauliSpectrum(2)), 31);
  LearnedHamiltonian out = learn(oracle, plan);
  REQUIRE(out.detection.support.empty());
  REQUIRE(two_norm(out.coefficients) <= 2.0 * plan.beta / plan.alpha);
}

TEST_CASE("learn is deterministic in the seed and the thread count",
          "[learner]") {
  LearnerPlan plan = practical_k1(20000);
  Hamiltonian target = two_term_h();
  auto run = [&]() {
    EvolutionOracle oracle(target, 4242);
    return learn(oracle, plan);
  };
  LearnedHamiltonian a = run();
  setenv("PAULIPROBE_THREADS", "4", 1);
  LearnedHamiltonian b = run();
  unsetenv("PAULIPROBE_THREADS");
  LearnedHamiltonian c = run();
  REQUIRE(a.coefficients.entries() == b.coefficients.entries());
  REQUIRE(a.coefficients.entries() == c.coefficients.entries());
  REQUIRE(a.ledger.queries == b.ledger.queries);
  REQUIRE(a.ledger.queries == c.ledger.queries);
}

TEST_CASE("theory-scale stage-1 demands are rejected as infeasible",
          "[learner]") {
  LearnerPlan plan = theory_parameters(2, 0.5, 1.0 / 3.0, 2.0);
  EvolutionOracle oracle(two_term_h(), 1);
  REQUIRE_THROWS_AS(learn(oracle, plan), PlanInfeasible);
}

TEST_CASE("theory-mode learning runs end to end at k = 1",
          "[learner][heavy]") {
  LearnerPlan plan = theory_parameters(1, 0.5, 1.0 / 3.0, 2.0);
  EvolutionOracle oracle(half_z(), 60601);
  LearnedHamiltonian out = learn(oracle, plan);
  REQUIRE(out.detection.support ==
          std::vector<PauliString>{PauliString::from_word("Z")});
  REQUIRE(out.coefficients.coefficient(PauliString::from_word("Z")).real() ==
          Catch::Approx(0.5).margin(0.02));
  REQUIRE(out.ledger.queries >= plan.m1);
}

TEST_CASE("bh_sum closed forms and validation", "[learner]") {
  SECTION("single unit coefficient") {
    Hamiltonian z(
        PauliSpectrum(1, {{PauliString::from_word("Z"), cplx(1.0, 0.0)}}), 1,
        true);
    REQUIRE(bh_sum(z, 1) == 1.0);
  }
  SECTION("balanced anticommuting pair at k = 1 gives sqrt(2)") {
    double r = std::sqrt(0.5);
    Hamiltonian h(PauliSpectrum(1, {{PauliString::from_word("X"), cplx(r, 0.0)},
                                    {PauliString::from_word("Z"), cplx(r, 0.0)}}),
                  1, true);
    REQUIRE(bh_sum(h, 1) == Catch::Approx(1.4142135623730951).margin(1e-12));
  }
  SECTION("exponent 2k/(k+1): the same shape at k = 2 gives 2^(1/3)") {
    double r = std::sqrt(0.5);
    Hamiltonian h(
        PauliSpectrum(2, {{PauliString::from_word("XI"), cplx(r, 0.0)},
                          {PauliString::from_word("ZI"), cplx(r, 0.0)}}),
        2, true);
    REQUIRE(bh_sum(h, 2) == Catch::Approx(1.2599210498948732).margin(1e-12));
  }
  SECTION("rejects inputs outside the promise") {
    Hamiltonian wide(
        PauliSpectrum(3, {{PauliString::from_word("XXX"), cplx(1.0, 0.0)}}), 3,
        true);
    REQUIRE_THROWS_AS(bh_sum(wide, 2), ConfigError);
    Hamiltonian loud(
        PauliSpectrum(1, {{PauliString::from_word("Z"), cplx(2.0, 0.0)}}));
    REQUIRE_THROWS_AS(bh_sum(loud, 1), ConfigError);
  }
  SECTION("the default constant C = 3 holds across random instances") {
    for (int k = 1; k <= 3; ++k) {
      double ck = std::pow(3.0, k);
      for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        Hamiltonian h = random_k_local(4, k, 0.5, seed);
        REQUIRE(bh_sum(h, k) <= ck);
      }
    }
  }
}

TEST_CASE("global Taylor bound on the full spectrum", "[learner]") {
  // |(u_0 - 1) + i a h_0|^2 + sum_{x != 0} |u_x + i a h_x|^2 <= a^4 for
  // normalized H and a <= 1/2. The left side is the normalized squared
  // two-norm of U - Id + i a H, computable densely via Parseval.
  const int n = 3;
  const int dim = 1 << n;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Hamiltonian h = random_k_local(n, n, 1.0, seed);
    if (h.inf_norm() == 0.0) continue;
    Eigen::MatrixXcd dense_h = dense_from_spectrum(h.spectrum());
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
      Eigen::MatrixXcd r = evolve_unitary(h, a) -
                           Eigen::MatrixXcd::Identity(dim, dim) +
                           cplx(0.0, a) * dense_h;
      double lhs = r.squaredNorm() / dim;
      INFO("seed " << seed << " a " << a << " lhs " << lhs);
      REQUIRE(lhs <= a * a * a * a);
    }
  }
}

TEST_CASE("two_norm_distance", "[learner]") {
  PauliSpectrum a(1, {{PauliString::from_word("Z"), cplx(1.0, 0.0)}});
  PauliSpectrum b(1, {{PauliString::from_word("Z"), cplx(0.5, 0.0)}});
  PauliSpectrum c(1, {{PauliString::from_word("X"), cplx(0.5, 0.0)}});
  REQUIRE(two_norm_distance(a, b) == 0.5);
  REQUIRE(two_norm_distance(a, a) == 0.0);
  REQUIRE(two_norm_distance(b, c) == Catch::Approx(std::sqrt(0.5)).margin(1e-15));
  REQUIRE(two_norm_distance(a, PauliSpectrum(1)) == 1.0);
  REQUIRE_THROWS_AS(two_norm_distance(a, PauliSpectrum(2)),
                    std::invalid_argument);
}
