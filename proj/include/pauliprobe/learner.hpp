#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/hamiltonian.hpp>
#include <pauliprobe/oracle.hpp>
#include <pauliprobe/parallel.hpp>
#include <pauliprobe/pauli.hpp>

namespace pauliprobe {

enum class PlanMode { Theory, Practical };

inline const char* to_string(PlanMode m) {
  return m == PlanMode::Theory ? "theory" : "practical";
}

/**
 * Parameters for the two-stage learner, derived from (k, eps, delta, C, c):
 *
 *   alpha = eps^(k+1) * C^(-k(k+1)/2)  — the evolution time (<= 1/2);
 *   gamma = alpha^2                    — stage-1 detection threshold;
 *   beta  = alpha^3 * eps              — stage-2 estimation accuracy;
 *   m1    = ceil(2 ln(2/delta) / gamma^4) — stage-1 Bell samples.
 *
 * Theory mode uses exactly these closed forms; they grow like alpha^-8, so
 * even k = 1 at eps = 0.5 needs ~6e7 samples and k = 2 needs ~1e15.
 * Practical mode carries user overrides of (alpha, gamma, beta, m1) so the
 * algorithm itself can run at desk scale; the closed-form theory values are
 * always computed and kept alongside for reporting, which is how the
 * super-polynomial growth of the guaranteed plan stays visible.
 */
struct LearnerPlan {
  int k = 0;
  double eps = 0.0;
  double delta = 0.0;
  double C = 0.0;
  double c = 1.0;
  PlanMode mode = PlanMode::Theory;
  // Effective values the algorithm runs with.
  double alpha = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double m1_exact = 0.0;  // true magnitude, even when it dwarfs uint64
  std::uint64_t m1 = 0;
  // Closed-form theory values for these (k, eps, delta, C, c), kept for
  // reporting even in Practical mode.
  double theory_alpha = 0.0;
  double theory_gamma = 0.0;
  double theory_beta = 0.0;
  double theory_m1 = 0.0;
};

namespace detail {

inline void validate_learner_inputs(int k, double eps, double delta, double C,
                                    double c) {
  if (k < 1) throw ConfigError("learner plan: k must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("learner plan: eps must be in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("learner plan: delta must be in (0, 1)");
  if (!(C > 1.0) || !std::isfinite(C))
    throw ConfigError("learner plan: C must exceed 1");
  if (!(c > 0.0) || !std::isfinite(c))
    throw ConfigError("learner plan: c must be positive and finite");
}

struct TheoryValues {
  double alpha, gamma, beta, m1_exact;
};

inline TheoryValues theory_values(int k, double eps, double delta, double C) {
  TheoryValues v;
  v.alpha = std::pow(eps, k + 1) * std::pow(C, -0.5 * k * (k + 1.0));
  v.gamma = v.alpha * v.alpha;
  v.beta = v.alpha * v.alpha * v.alpha * eps;
  double g4 = v.gamma * v.gamma * v.gamma * v.gamma;
  v.m1_exact = std::ceil(2.0 * std::log(2.0 / delta) / g4);
  return v;
}

inline std::uint64_t saturating_count(double exact) {
  return exact < 1.8e19 ? static_cast<std::uint64_t>(exact)
                        : std::numeric_limits<std::uint64_t>::max();
}

// Stream tag for stage-2 forks; XORed with the coefficient's string index,
// so every coefficient draws from its own deterministic stream.
inline constexpr std::uint64_t kStage2Stream = 0xE5717A7E;

constexpr std::uint64_t kDetectChunk = 1 << 20;

}  // namespace detail

inline LearnerPlan theory_parameters(int k, double eps, double delta, double C,
                                     double c = 1.0) {
  detail::validate_learner_inputs(k, eps, delta, C, c);
  detail::TheoryValues v = detail::theory_values(k, eps, delta, C);
  if (v.alpha > 0.5)
    throw PlanInfeasible("theory_parameters: alpha = " + std::to_string(v.alpha) +
                         " exceeds 1/2; eps is too large for this (k, C)");
  LearnerPlan plan;
  plan.k = k;
  plan.eps = eps;
  plan.delta = delta;
  plan.C = C;
  plan.c = c;
  plan.mode = PlanMode::Theory;
  plan.alpha = v.alpha;
  plan.gamma = v.gamma;
  plan.beta = v.beta;
  plan.m1_exact = v.m1_exact;
  plan.m1 = detail::saturating_count(v.m1_exact);
  plan.theory_alpha = v.alpha;
  plan.theory_gamma = v.gamma;
  plan.theory_beta = v.beta;
  plan.theory_m1 = v.m1_exact;
  return plan;
}

inline LearnerPlan practical_parameters(int k, double eps, double delta,
                                        double C, double c, double alpha,
                                        double gamma, double beta,
                                        std::uint64_t m1) {
  detail::validate_learner_inputs(k, eps, delta, C, c);
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("practical_parameters: alpha must be positive");
  if (alpha > 0.5)
    throw PlanInfeasible(
        "practical_parameters: alpha exceeds 1/2, outside the Taylor regime");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("practical_parameters: gamma must be in (0, 1)");
  if (!(beta > 0.0 && beta <= 2.0))
    throw ConfigError(
        "practical_parameters: beta must be in (0, 2] (coefficients of a "
        "unitary never sit further than 2 from an estimate)");
  if (m1 == 0) throw ConfigError("practical_parameters: m1 must be positive");
  // Theory values are computed without the alpha gate: here they are
  // diagnostics to report next to the overrides, not a plan to run.
  detail::TheoryValues v = detail::theory_values(k, eps, delta, C);
  LearnerPlan plan;
  plan.k = k;
  plan.eps = eps;
  plan.delta = delta;
  plan.C = C;
  plan.c = c;
  plan.mode = PlanMode::Practical;
  plan.alpha = alpha;
  plan.gamma = gamma;
  plan.beta = beta;
  plan.m1_exact = static_cast<double>(m1);
  plan.m1 = m1;
  plan.theory_alpha = v.alpha;
  plan.theory_gamma = v.gamma;
  plan.theory_beta = v.beta;
  plan.theory_m1 = v.m1_exact;
  return plan;
}

/**
 * Stage-1 output: empirical amplitudes u'_x = sqrt(count_x / m1) for every
 * observed string, and the detected support S = {x : u'_x > gamma} minus
 * the identity. |S| < gamma^-2 always, since the squared amplitudes sum
 * to 1. Both lists are sorted by string index.
 */
struct DetectionResult {
  std::vector<std::pair<PauliString, double>> amplitudes;
  std::vector<PauliString> support;
  std::uint64_t m1 = 0;
};

/**
 * Stage-2 output: complex estimates u''_x for exactly the detected support
 * plus the identity (in string order, identity first), each accurate to
 * beta with per-coefficient failure budget delta_each = delta/(2(|S|+1)).
 */
struct CoefficientEstimates {
  std::vector<std::pair<PauliString, cplx>> estimates;
  double beta = 0.0;
  double delta_each = 0.0;
};

// Upper bounds on the two contributions to ||H - H''||_2^2: term_I covers
// the estimated coordinates (Taylor bias plus estimation noise), term_II
// the truncated ones (small-coefficient mass, bounded through the
// Bohnenblust-Hille inequality at constant C).
struct ErrorBudget {
  double term_I = 0.0;
  double term_II = 0.0;
  double total() const { return term_I + term_II; }
};

inline ErrorBudget error_budget(const LearnerPlan& plan) {
  ErrorBudget b;
  const double a = plan.alpha, g = plan.gamma, bt = plan.beta, c = plan.c;
  b.term_I = 2.0 * c * c * a * a + 2.0 * bt * bt / (a * a) * (1.0 / (g * g) + 1.0);
  b.term_II =
      std::pow(2.0 * g / a + c * a, 2.0 / (plan.k + 1)) * std::pow(plan.C, plan.k);
  return b;
}

/**
 * The learner's output: a real-coefficient spectrum supported on the
 * detected strings plus the identity, with everything needed to audit the
 * run — both stages' raw results, the plan, the error budget, the oracle's
 * cumulative ledger at completion, and its seed. Coefficients that round
 * to exactly zero are dropped from the spectrum but remain visible in
 * `estimates`.
 */
struct LearnedHamiltonian {
  PauliSpectrum coefficients;
  DetectionResult detection;
  CoefficientEstimates estimates;
  LearnerPlan plan;
  ErrorBudget budget;
  QueryLedger ledger;
  std::uint64_t seed = 0;
};

/**
 * Stage 1: Bell-sample m1 shots at t = alpha and keep the strings whose
 * empirical amplitude clears gamma. The caller promises the hidden
 * Hamiltonian is k-local with operator norm at most 1; nothing here reads
 * it directly.
 */
inline DetectionResult detect_big_coefficients(EvolutionOracle& oracle,
                                               const LearnerPlan& plan) {
  if (plan.m1 > kMaxRunnableSamples)
    throw PlanInfeasible(
        "detect_big_coefficients: stage 1 wants " +
        std::to_string(plan.m1_exact) +
        " samples, over the runnable budget; use practical-mode overrides");
  int n = oracle.qubits();
  std::vector<std::uint64_t> counts(std::size_t{1} << (2 * n), 0);
  std::uint64_t remaining = plan.m1;
  while (remaining > 0) {
    std::uint64_t chunk = std::min(remaining, detail::kDetectChunk);
    for (const auto& p : oracle.bell_sample(plan.alpha, chunk))
      ++counts[p.index()];
    remaining -= chunk;
  }
  DetectionResult det;
  det.m1 = plan.m1;
  for (std::uint64_t idx = 0; idx < counts.size(); ++idx) {
    if (counts[idx] == 0) continue;
    PauliString p = PauliString::from_index(n, idx);
    double amp = std::sqrt(static_cast<double>(counts[idx]) /
                           static_cast<double>(plan.m1));
    det.amplitudes.emplace_back(p, amp);
    if (amp > plan.gamma && !p.is_identity()) det.support.push_back(p);
  }
  return det;
}

/**
 * Stage 2: estimate u_x to accuracy beta for the detected support plus the
 * identity, splitting the stage's delta/2 budget evenly. Estimations are
 * independent, so each coefficient runs on its own oracle fork (stream
 * keyed by the string's index) across the thread budget; the parent
 * absorbs the forked ledgers serially after the join, keeping both the
 * estimates and the totals independent of scheduling.
 */
inline CoefficientEstimates estimate_big_coefficients(
    EvolutionOracle& oracle, const LearnerPlan& plan,
    const DetectionResult& det) {
  int n = oracle.qubits();
  std::vector<PauliString> keys;
  keys.reserve(det.support.size() + 1);
  keys.push_back(PauliString::identity(n));
  keys.insert(keys.end(), det.support.begin(), det.support.end());

  CoefficientEstimates est;
  est.beta = plan.beta;
  est.delta_each =
      plan.delta / (2.0 * static_cast<double>(det.support.size() + 1));

  std::vector<EvolutionOracle> forks;
  forks.reserve(keys.size());
  for (const auto& key : keys)
    forks.push_back(oracle.fork(detail::kStage2Stream ^ key.index()));
  std::vector<cplx> values(keys.size());
  parallel_for_indexed(keys.size(), [&](std::size_t i) {
    values[i] = forks[i].estimate_coefficient(plan.alpha, keys[i], plan.beta,
                                              est.delta_each);
  });
  for (const auto& fork : forks) oracle.absorb(fork.ledger());

  est.estimates.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    est.estimates.emplace_back(keys[i], values[i]);
  return est;
}

/**
 * The full two-stage learner. Output coefficients follow
 *
 *   h''_0 = Re(i alpha^-1 (u''_0 - 1)),   h''_x = Re(i alpha^-1 u''_x),
 *
 * real by construction (taking the real part is what keeps the output
 * self-adjoint). With the theory plan this satisfies
 * ||H - H''||_2^2 <= term_I + term_II with probability 1 - delta; the same
 * budget is reported for practical plans, where it is an audit quantity
 * rather than a guarantee.
 */
inline LearnedHamiltonian learn(EvolutionOracle& oracle,
                                const LearnerPlan& plan) {
  DetectionResult det = detect_big_coefficients(oracle, plan);
  CoefficientEstimates est = estimate_big_coefficients(oracle, plan, det);
  const cplx i_over_alpha(0.0, 1.0 / plan.alpha);
  std::vector<PauliSpectrum::Entry> entries;
  entries.reserve(est.estimates.size());
  for (const auto& [key, u2] : est.estimates) {
    cplx shifted = key.is_identity() ? u2 - 1.0 : u2;
    entries.emplace_back(key, cplx(std::real(i_over_alpha * shifted), 0.0));
  }
  return LearnedHamiltonian{PauliSpectrum(oracle.qubits(), std::move(entries)),
                            std::move(det),
                            std::move(est),
                            plan,
                            error_budget(plan),
                            oracle.ledger(),
                            oracle.seed()};
}

/**
 * sum_x |h_x|^(2k/(k+1)) over the spectrum, identity included: the
 * quantity the Bohnenblust-Hille inequality bounds by C^k for k-local
 * operators of norm at most 1. Computed exactly from the coefficients;
 * callers compare against their chosen C to certify it on an instance
 * family.
 */
inline double bh_sum(const Hamiltonian& h, int k) {
  if (k < 1 || k > h.n()) throw ConfigError("bh_sum: k must be in [1, n]");
  if (tail_two_norm(h.spectrum(), k) > 1e-12)
    throw ConfigError("bh_sum: operator has weight beyond k");
  if (h.inf_norm() > 1.0 + 1e-9)
    throw ConfigError("bh_sum: operator norm exceeds the unit promise");
  const double exponent = 2.0 * k / (k + 1.0);
  double sum = 0.0;
  for (const auto& [p, a] : h.spectrum())
    sum += std::pow(std::abs(a.real()), exponent);
  return sum;
}

}  // namespace pauliprobe
