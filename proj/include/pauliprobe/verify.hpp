#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/evolution.hpp>
#include <pauliprobe/generate.hpp>
#include <pauliprobe/learner.hpp>
#include <pauliprobe/oracle.hpp>
#include <pauliprobe/pauli.hpp>
#include <pauliprobe/rng.hpp>
#include <pauliprobe/stats.hpp>
#include <pauliprobe/tester.hpp>

/**
 * Self-verification suite: every module's core invariant re-checked from
 * scratch against independent references (naive trace-formula transform,
 * dense matrix exponentials, exact planted tails, exact Bell distributions).
 * Each check reports a named measured value against its threshold; the
 * quick level runs in seconds, the full level reproduces the acceptance-
 * scale sample counts.
 */
namespace pauliprobe {

enum class VerifyLevel { Quick, Full };

inline const char* to_string(VerifyLevel level) {
  return level == VerifyLevel::Quick ? "quick" : "full";
}

inline VerifyLevel verify_level_from_string(std::string_view s) {
  if (s == "quick") return VerifyLevel::Quick;
  if (s == "full") return VerifyLevel::Full;
  throw ConfigError("verify level must be quick or full, got \"" +
                    std::string(s) + "\"");
}

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  const char* relation = "<=";  // how measured must compare to threshold
  bool pass = false;
  std::string detail;  // sample counts, intervals, fixture notes
};

struct VerifyReport {
  VerifyLevel level = VerifyLevel::Quick;
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/**
 * The transform hook exists so tests can inject a deliberately corrupted
 * fast transform and watch exactly the transform-equivalence check fail;
 * an empty function means "use the library's spectrum_from_dense".
 */
struct VerifyOptions {
  VerifyLevel level = VerifyLevel::Quick;
  std::function<PauliSpectrum(const Eigen::MatrixXcd&)> transform;
};

namespace detail {

inline CheckResult check_le(std::string name, double measured, double threshold,
                            std::string detail_text) {
  return CheckResult{std::move(name), measured,  threshold,
                     "<=",            measured <= threshold,
                     std::move(detail_text)};
}

inline CheckResult check_ge(std::string name, double measured, double threshold,
                            std::string detail_text) {
  return CheckResult{std::move(name), measured,  threshold,
                     ">=",            measured >= threshold,
                     std::move(detail_text)};
}

inline Eigen::MatrixXcd random_dense(int n, SplitMix64& rng) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = cplx(rng.symmetric(), rng.symmetric());
  return m;
}

inline Eigen::MatrixXcd random_hermitian(int n, SplitMix64& rng) {
  Eigen::MatrixXcd m = random_dense(n, rng);
  return 0.5 * (m + m.adjoint().eval());
}

// Independent reference transform: a_idx = Tr[sigma_idx M] / 2^n with the
// Pauli matrix built by explicit Kronecker products. Deliberately naive so
// agreement with the fast tensorized transform is meaningful.
inline std::vector<cplx> reference_spectrum(const Eigen::MatrixXcd& m) {
  const int n = qubits_from_dim(m.rows(), m.cols());
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd sigma[4];
  sigma[0] << 1, 0, 0, 1;
  sigma[1] << 0, 1, 1, 0;
  sigma[2] << 0, -i, i, 0;
  sigma[3] << 1, 0, 0, -1;
  const std::size_t total = std::size_t{1} << (2 * n);
  std::vector<cplx> out(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
    // Qubit 0 is the leftmost tensor factor = most significant base-4 digit.
    for (int q = 0; q < n; ++q) {
      const int letter = static_cast<int>((idx >> (2 * (n - 1 - q))) & 3u);
      Eigen::MatrixXcd next(op.rows() * 2, op.cols() * 2);
      for (Eigen::Index r = 0; r < op.rows(); ++r)
        for (Eigen::Index c = 0; c < op.cols(); ++c)
          next.block(2 * r, 2 * c, 2, 2) = op(r, c) * sigma[letter];
      op = std::move(next);
    }
    out[idx] = (op * m).trace() / static_cast<double>(m.rows());
  }
  return out;
}

// Per-level sample counts; the full level matches the acceptance-scale runs.
struct VerifyCounts {
  int hermitians;
  int hermitian_max_n;
  int matrices_per_n;
  int transform_max_n;
  int claim_per_label;
  int taylor_hamiltonians;
  int bh_per_k;
  std::uint64_t tv_samples;
  int estimator_calls;
};

inline VerifyCounts counts_for(VerifyLevel level) {
  if (level == VerifyLevel::Quick)
    return VerifyCounts{20, 4, 3, 3, 10, 10, 50, 20000, 200};
  return VerifyCounts{100, 5, 5, 4, 100, 100, 1000, 100000, 1000};
}

}  // namespace detail

inline VerifyReport verify_suite(const VerifyOptions& opts = {}) {
  const detail::VerifyCounts counts = detail::counts_for(opts.level);
  const auto transform =
      opts.transform ? opts.transform
                     : [](const Eigen::MatrixXcd& m) { return spectrum_from_dense(m); };
  VerifyReport report;
  report.level = opts.level;

  {  // Parseval: sum of squared coefficients == Frobenius mass / 2^n.
    SplitMix64 rng(0x5EED0001);
    double worst = 0.0;
    for (int i = 0; i < counts.hermitians; ++i) {
      const int n = 2 + i % (counts.hermitian_max_n - 1);
      Eigen::MatrixXcd m = detail::random_hermitian(n, rng);
      const double lhs = two_norm(spectrum_from_dense(m));
      const double rhs = m.squaredNorm() / static_cast<double>(m.rows());
      worst = std::max(worst, std::abs(lhs * lhs - rhs) / rhs);
    }
    report.checks.push_back(detail::check_le(
        "parseval", worst, 1e-9,
        std::to_string(counts.hermitians) + " random Hermitians, n 2.." +
            std::to_string(counts.hermitian_max_n)));
  }

  {  // Fast transform vs the naive trace formula, and dense round-trip.
    SplitMix64 rng(0x5EED0002);
    double worst_diff = 0.0;
    double worst_rt = 0.0;
    for (int n = 1; n <= counts.transform_max_n; ++n) {
      for (int i = 0; i < counts.matrices_per_n; ++i) {
        Eigen::MatrixXcd m = detail::random_dense(n, rng);
        PauliSpectrum fast = transform(m);
        std::vector<cplx> naive = detail::reference_spectrum(m);
        for (std::size_t idx = 0; idx < naive.size(); ++idx)
          worst_diff = std::max(
              worst_diff,
              std::abs(fast.coefficient(PauliString::from_index(n, idx)) -
                       naive[idx]));
        worst_rt = std::max(
            worst_rt,
            (dense_from_spectrum(spectrum_from_dense(m)) - m).cwiseAbs().maxCoeff());
      }
    }
    const std::string scope = std::to_string(counts.matrices_per_n) +
                              " matrices per n, n 1.." +
                              std::to_string(counts.transform_max_n);
    report.checks.push_back(
        detail::check_le("transform-equivalence", worst_diff, 1e-10, scope));
    report.checks.push_back(detail::check_le("round-trip", worst_rt, 1e-10, scope));
  }

  {  // Planted separation: exact evolved tails respect the certified bounds.
    const TesterPlan plan = compute_plan(0.0, 0.3, 1.0 / 3.0, 1);
    double worst_close = 0.0;
    double best_far = 1.0;
    for (int i = 0; i < counts.claim_per_label; ++i) {
      PlantedInstance close = planted_instance(4, 1, 0.0, 0.3,
                                               InstanceLabel::Close, 1000 + i);
      PlantedInstance far =
          planted_instance(4, 1, 0.0, 0.3, InstanceLabel::Far, 2000 + i);
      worst_close = std::max(
          worst_close,
          tail_two_norm(unitary_spectrum(close.hamiltonian, plan.alpha).spectrum,
                        plan.k));
      best_far = std::min(
          best_far,
          tail_two_norm(unitary_spectrum(far.hamiltonian, plan.alpha).spectrum,
                        plan.k));
    }
    const std::string scope =
        std::to_string(counts.claim_per_label) +
        " planted instances per label, n=4 k=1 eps=(0,0.3) alpha=0.1";
    report.checks.push_back(detail::check_le("claim-close-ceiling", worst_close,
                                             plan.low_bound, scope));
    report.checks.push_back(
        detail::check_ge("claim-far-floor", best_far, plan.high_bound, scope));
  }

  {  // First-order evolution bounds: operator-norm remainder and the
     // Frobenius-mass residual that the tester/learner analyses rest on.
    double worst_remainder = 0.0;
    double worst_residual = 0.0;
    for (int i = 0; i < counts.taylor_hamiltonians; ++i) {
      Hamiltonian h = random_k_local(3, 3, 1.0, 3000 + i);
      const Eigen::MatrixXcd dense = dense_from_spectrum(h.spectrum());
      const Eigen::MatrixXcd id =
          Eigen::MatrixXcd::Identity(dense.rows(), dense.cols());
      for (int step = 1; step <= 10; ++step) {
        const double t = static_cast<double>(step) / 20.0;  // 0.05 .. 0.5
        TaylorRemainder r = remainder_check(h, t);
        worst_remainder = std::max(worst_remainder, r.remainder_norm / (t * t));
        const Eigen::MatrixXcd diff =
            evolve_unitary(h, t) - id + cplx(0.0, t) * dense;
        worst_residual = std::max(
            worst_residual, diff.squaredNorm() / static_cast<double>(dense.rows()) /
                                (t * t * t * t));
      }
    }
    const std::string scope = std::to_string(counts.taylor_hamiltonians) +
                              " random normalized Hamiltonians, n=3, t in "
                              "{0.05..0.5}";
    report.checks.push_back(
        detail::check_le("taylor-remainder", worst_remainder, 1.0, scope));
    report.checks.push_back(
        detail::check_le("first-order-residual", worst_residual, 1.0, scope));
  }

  {  // Bohnenblust-Hille sums stay under 3^k on random normalized instances.
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double bound = std::pow(3.0, k);
      for (int i = 0; i < counts.bh_per_k; ++i) {
        Hamiltonian h = random_k_local(4, k, 0.5, derive_seed(0xB40000 + k, i));
        worst = std::max(worst, bh_sum(h, k) / bound);
      }
    }
    report.checks.push_back(detail::check_le(
        "bh-bound", worst, 1.0,
        std::to_string(counts.bh_per_k) +
            " random normalized instances per k, k in {1,2,3}, n=4"));
  }

  {  // Sampler fidelity: empirical Bell distribution vs the exact one.
    Hamiltonian h = random_k_local(4, 2, 0.5, 7);
    EvolutionOracle oracle(h, 99, /*verification_mode=*/true);
    const double t = 0.25;
    std::vector<double> emp(std::size_t{1} << (2 * 4), 0.0);
    const double inv_m = 1.0 / static_cast<double>(counts.tv_samples);
    for (const PauliString& x : oracle.bell_sample(t, counts.tv_samples))
      emp[static_cast<std::size_t>(x.index())] += inv_m;
    for (const auto& [x, p] : oracle.exact_distribution(t))
      emp[static_cast<std::size_t>(x.index())] -= p;
    double tv = 0.0;
    for (double d : emp) tv += std::abs(d);
    tv *= 0.5;
    report.checks.push_back(detail::check_le(
        "sampler-tv", tv, 0.02,
        std::to_string(counts.tv_samples) + " Bell samples, n=4, fixed seed"));
  }

  {  // Estimator calibration: miss rate of the coefficient estimator must
     // stay within its failure budget delta.
    const double beta = 0.05;
    const double delta = 0.1;
    Hamiltonian h = random_k_local(4, 2, 0.5, 7);
    const double t = 0.25;
    UnitarySpectrum us = unitary_spectrum(h, t);
    // Probe the identity plus the four heaviest non-identity coefficients.
    std::vector<std::pair<double, PauliString>> by_mass;
    for (const auto& [x, u] : us.spectrum)
      if (x.weight() > 0) by_mass.emplace_back(std::norm(u), x);
    std::sort(by_mass.begin(), by_mass.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<PauliString> probes{PauliString::identity(4)};
    for (std::size_t i = 0; i < by_mass.size() && i < 4; ++i)
      probes.push_back(by_mass[i].second);
    EvolutionOracle oracle(h, 4242);
    std::uint64_t misses = 0;
    for (int call = 0; call < counts.estimator_calls; ++call) {
      const PauliString& x = probes[static_cast<std::size_t>(call) % probes.size()];
      EvolutionOracle fork = oracle.fork(static_cast<std::uint64_t>(call));
      const cplx est = fork.estimate_coefficient(t, x, beta, delta);
      if (std::abs(est - us.spectrum.coefficient(x)) > beta) ++misses;
    }
    const double miss_rate =
        static_cast<double>(misses) / static_cast<double>(counts.estimator_calls);
    WilsonInterval w =
        wilson_interval(misses, static_cast<std::uint64_t>(counts.estimator_calls));
    report.checks.push_back(detail::check_le(
        "estimator-calibration", miss_rate, delta,
        std::to_string(counts.estimator_calls) +
            " calls at beta=0.05, miss-rate 95% interval [" +
            std::to_string(w.lower) + ", " + std::to_string(w.upper) + "]"));
  }

  return report;
}

/// One line per check — status, name, measured value vs threshold, context —
/// plus a final tally.
inline std::string format_report(const VerifyReport& report) {
  std::string out =
      "verification suite (" + std::string(to_string(report.level)) + " level)\n";
  std::size_t passed = 0;
  for (const CheckResult& c : report.checks) {
    passed += c.pass ? 1 : 0;
    std::string name = c.name;
    name.append(name.size() < 24 ? 24 - name.size() : 1, ' ');
    char buf[96];
    std::snprintf(buf, sizeof(buf), "measured %.6g %s threshold %.6g",
                  c.measured, c.relation, c.threshold);
    out += std::string(c.pass ? "  PASS " : "  FAIL ") + name + buf;
    if (!c.detail.empty()) out += "  (" + c.detail + ")";
    out += "\n";
  }
  out += "  " + std::to_string(passed) + "/" + std::to_string(report.checks.size()) +
         " checks passed\n";
  return out;
}

}  // namespace pauliprobe
