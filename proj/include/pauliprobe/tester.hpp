#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/generate.hpp>
#include <pauliprobe/oracle.hpp>

namespace pauliprobe {

enum class Decision { CloseToLocal, FarFromLocal };

inline const char* to_string(Decision d) {
  return d == Decision::CloseToLocal ? "close_to_local" : "far_from_local";
}

/**
 * Everything the tolerant locality test needs, derived from
 * (eps1, eps2, delta, k, c):
 *
 *   alpha       = (eps2 - eps1) / (3c), the evolution time (must be <= 1/2);
 *   low_bound   = (eps2 - eps1)(2 eps1 + eps2) / (9c)   and
 *   high_bound  = (eps2 - eps1)(eps1 + 2 eps2) / (9c):  certified ceilings/
 *                 floors for the evolved tail ||U(alpha)_{>k}||_2 of Close
 *                 and Far Hamiltonians respectively;
 *   threshold   = midpoint of the squared bounds — the accept/reject cut on
 *                 the sampled tail mass;
 *   tau         = half the squared gap; Hoeffding then needs
 *   m_samples   = ceil(ln(2/delta) / (2 tau^2)) Bell samples for a 1-delta
 *                 success guarantee.
 *
 * tau here is wider than the (eps2-eps1)^2/(18c) additive target a direct
 * analysis would use, by a factor 6(eps1+eps2)/(eps2-eps1) >= 6; that
 * sharper target is carried along as error_target for reporting.
 */
struct TesterPlan {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double delta = 0.0;
  int k = 0;
  double c = 1.0;
  double alpha = 0.0;
  double low_bound = 0.0;
  double high_bound = 0.0;
  double threshold = 0.0;
  double tau = 0.0;
  double m_samples_exact = 0.0;
  std::uint64_t m_samples = 0;
  double error_target = 0.0;
};

inline TesterPlan compute_plan(double eps1, double eps2, double delta, int k,
                               double c = 1.0) {
  if (!(eps1 >= 0.0 && eps1 < eps2 && eps2 <= 1.0))
    throw ConfigError("compute_plan: need 0 <= eps1 < eps2 <= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("compute_plan: delta must be in (0, 1)");
  if (k < 1) throw ConfigError("compute_plan: k must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c))
    throw ConfigError("compute_plan: c must be positive and finite");

  TesterPlan plan;
  plan.eps1 = eps1;
  plan.eps2 = eps2;
  plan.delta = delta;
  plan.k = k;
  plan.c = c;
  plan.alpha = (eps2 - eps1) / (3.0 * c);
  if (plan.alpha > 0.5)
    throw PlanInfeasible("compute_plan: alpha = " + std::to_string(plan.alpha) +
                         " exceeds 1/2, outside the Taylor regime");
  plan.low_bound = (eps2 - eps1) * (2.0 * eps1 + eps2) / (9.0 * c);
  plan.high_bound = (eps2 - eps1) * (eps1 + 2.0 * eps2) / (9.0 * c);
  plan.threshold =
      0.5 * (plan.low_bound * plan.low_bound + plan.high_bound * plan.high_bound);
  plan.tau =
      0.5 * (plan.high_bound * plan.high_bound - plan.low_bound * plan.low_bound);
  plan.m_samples_exact = std::ceil(std::log(2.0 / delta) / (2.0 * plan.tau * plan.tau));
  plan.m_samples =
      plan.m_samples_exact < 1.8e19
          ? static_cast<std::uint64_t>(plan.m_samples_exact)
          : std::numeric_limits<std::uint64_t>::max();
  plan.error_target = (eps2 - eps1) * (eps2 - eps1) / (18.0 * c);
  return plan;
}

/**
 * Outcome of one tolerant test run. estimated_tail_mass is the fraction of
 * Bell samples whose string fell outside the property; the decision is
 * FarFromLocal exactly when it exceeds plan.threshold.
 */
struct TestVerdict {
  Decision decision = Decision::CloseToLocal;
  double estimated_tail_mass = 0.0;
  std::uint64_t samples_used = 0;
  TesterPlan plan;
  QueryLedger ledger;
  std::uint64_t seed = 0;
};

// One entry of a test_many batch: a plan plus the membership predicate
// defining the tested set of strings (weight <= k for plain locality).
struct PropertyTest {
  TesterPlan plan;
  std::function<bool(const PauliString&)> member;
};

namespace detail {

constexpr std::uint64_t kSampleChunk = 1 << 20;

// Draws m Bell samples at evolution time alpha and counts, per predicate,
// how many fell outside the predicate's set. One stream serves all
// predicates, which is what makes the batched tester share queries.
inline std::vector<std::uint64_t> count_non_members(
    EvolutionOracle& oracle, double alpha, std::uint64_t m,
    const std::vector<const PropertyTest*>& tests) {
  std::vector<std::uint64_t> misses(tests.size(), 0);
  std::uint64_t remaining = m;
  while (remaining > 0) {
    std::uint64_t chunk = std::min(remaining, kSampleChunk);
    auto samples = oracle.bell_sample(alpha, chunk);
    for (const auto& p : samples)
      for (std::size_t i = 0; i < tests.size(); ++i)
        if (!tests[i]->member(p)) ++misses[i];
    remaining -= chunk;
  }
  return misses;
}

inline std::uint64_t effective_samples(const TesterPlan& plan,
                                       std::uint64_t m_override) {
  std::uint64_t m = m_override != 0 ? m_override : plan.m_samples;
  if (m == 0) throw ConfigError("tester: sample count must be positive");
  if (m > kMaxRunnableSamples)
    throw PlanInfeasible(
        "tester: m_samples = " + std::to_string(plan.m_samples_exact) +
        " exceeds the runnable budget; pass a desk-scale override "
        "(this voids the 1-delta guarantee)");
  return m;
}

inline TestVerdict verdict_from(const TesterPlan& plan, std::uint64_t m,
                                std::uint64_t misses, EvolutionOracle& oracle) {
  double estimate = static_cast<double>(misses) / static_cast<double>(m);
  return TestVerdict{estimate > plan.threshold ? Decision::FarFromLocal
                                               : Decision::CloseToLocal,
                     estimate, m, plan, oracle.ledger(), oracle.seed()};
}

}  // namespace detail

/**
 * Tolerant property test for an arbitrary set of Pauli strings, given by its
 * membership predicate. Samples at t = plan.alpha and rejects when the
 * estimated outside-mass exceeds plan.threshold. A nonzero m_override
 * replaces plan.m_samples (desk-scale mode: the 1-delta guarantee is void,
 * empirical success is what the experiment harness then measures).
 */
inline TestVerdict test_property(EvolutionOracle& oracle, const TesterPlan& plan,
                                 const std::function<bool(const PauliString&)>& member,
                                 std::uint64_t m_override = 0) {
  if (!member) throw ConfigError("test_property: empty membership predicate");
  std::uint64_t m = detail::effective_samples(plan, m_override);
  PropertyTest test{plan, member};
  auto misses = detail::count_non_members(oracle, plan.alpha, m, {&test});
  return detail::verdict_from(plan, m, misses[0], oracle);
}

// Tolerant k-locality test: the property is "weight(x) <= plan.k".
inline TestVerdict test_locality(EvolutionOracle& oracle, const TesterPlan& plan,
                                 std::uint64_t m_override = 0) {
  if (plan.k > oracle.qubits())
    throw ConfigError("test_locality: plan.k exceeds the oracle's qubit count");
  int k = plan.k;
  return test_property(
      oracle, plan, [k](const PauliString& p) { return p.weight() <= k; },
      m_override);
}

/**
 * Runs M property tests with a union-bound failure budget: each test is
 * re-planned at delta_total / M. Tests whose plans land on the same alpha
 * share one Bell-sample stream, so such a group costs only the largest
 * member's sample count. Verdicts come back in input order.
 */
inline std::vector<TestVerdict> test_many(EvolutionOracle& oracle,
                                          const std::vector<PropertyTest>& tests,
                                          double delta_total,
                                          std::uint64_t m_override = 0) {
  if (tests.empty()) throw ConfigError("test_many: empty test batch");
  if (!(delta_total > 0.0 && delta_total < 1.0))
    throw ConfigError("test_many: delta_total must be in (0, 1)");
  double delta_each = delta_total / static_cast<double>(tests.size());

  std::vector<PropertyTest> replanned;
  replanned.reserve(tests.size());
  for (const auto& t : tests) {
    if (!t.member) throw ConfigError("test_many: empty membership predicate");
    replanned.push_back(
        {compute_plan(t.plan.eps1, t.plan.eps2, delta_each, t.plan.k, t.plan.c),
         t.member});
  }

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < replanned.size(); ++i)
    groups[replanned[i].plan.alpha].push_back(i);

  std::vector<TestVerdict> verdicts(replanned.size());
  for (const auto& [alpha, members] : groups) {
    std::uint64_t m = 0;
    std::vector<const PropertyTest*> group;
    for (std::size_t i : members) {
      m = std::max(m, detail::effective_samples(replanned[i].plan, m_override));
      group.push_back(&replanned[i]);
    }
    auto misses = detail::count_non_members(oracle, alpha, m, group);
    for (std::size_t j = 0; j < members.size(); ++j)
      verdicts[members[j]] =
          detail::verdict_from(replanned[members[j]].plan, m, misses[j], oracle);
  }
  return verdicts;
}

}  // namespace pauliprobe
