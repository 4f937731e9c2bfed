#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <pauliprobe/errors.hpp>
#include <pauliprobe/generate.hpp>
#include <pauliprobe/learner.hpp>
#include <pauliprobe/oracle.hpp>
#include <pauliprobe/parallel.hpp>
#include <pauliprobe/serialize.hpp>
#include <pauliprobe/stats.hpp>
#include <pauliprobe/tester.hpp>

/**
 * The experiment harness behind the command-line tools: configure a batch of
 * tester or learner trials, run them on a worker pool, and aggregate the
 * outcomes into a reproducible record.
 *
 * Determinism contract: trial i generates its instance from seed base+i and
 * its oracle from derive_seed(base+i, tag), so the full record — and the CSV
 * rendered from it with explicit "%.17g" formatting — depends only on
 * (config, seed), never on thread count or scheduling. Wall-clock duration
 * appears in the JSON record only, never in the CSV.
 */
namespace pauliprobe {

enum class ExperimentKind { Tester, Learner, Verify };

inline const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Tester: return "tester";
    case ExperimentKind::Learner: return "learner";
    default: return "verify";
  }
}

inline ExperimentKind experiment_kind_from_string(std::string_view s) {
  if (s == "test" || s == "tester") return ExperimentKind::Tester;
  if (s == "learn" || s == "learner") return ExperimentKind::Learner;
  if (s == "verify") return ExperimentKind::Verify;
  throw ConfigError("experiment kind must be test, learn, or verify, got \"" +
                    std::string(s) + "\"");
}

/**
 * Everything a run needs, validated before any work starts. Tester trials
 * use (n, k, eps1, eps2, delta, c) and the optional sample override m;
 * learner trials use (n, k, eps, delta, C, c, density), the plan mode with
 * its practical-mode overrides, and target_error as the per-trial success
 * yardstick (0 means "use eps").
 */
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Tester;
  int n = 4;
  int k = 1;
  double eps1 = 0.0;
  double eps2 = 0.3;
  double eps = 0.5;
  double delta = 1.0 / 3.0;
  double C = 3.0;
  double c = 1.0;
  double density = 0.5;
  PlanMode mode = PlanMode::Theory;
  double alpha = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  std::uint64_t m1 = 0;
  std::uint64_t m = 0;  // tester sample override; 0 = run the full plan
  double target_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  std::string out;  // output directory; empty = don't persist
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::Verify) return;  // no trial parameters
  if (cfg.trials == 0) throw ConfigError("config: trials must be >= 1");
  if (cfg.n < 1 || cfg.n > qubit_cap())
    throw ConfigError("config: n must be in [1, " + std::to_string(qubit_cap()) +
                      "]");
  if (cfg.k < 1 || cfg.k > cfg.n)
    throw ConfigError("config: need 1 <= k <= n");
  if (cfg.kind == ExperimentKind::Tester && cfg.k >= cfg.n)
    throw ConfigError(
        "config: balanced tester trials plant Far instances, which need k < n");
  if (cfg.kind == ExperimentKind::Learner) {
    if (!(cfg.density >= 0.0 && cfg.density <= 1.0))
      throw ConfigError("config: density must be in [0, 1]");
    if (cfg.target_error < 0.0)
      throw ConfigError("config: target_error must be >= 0");
    if (cfg.mode == PlanMode::Practical &&
        !(cfg.alpha > 0.0 && cfg.gamma > 0.0 && cfg.beta > 0.0 && cfg.m1 >= 1))
      throw ConfigError(
          "config: practical mode needs all of alpha, gamma, beta, m1");
  }
  // Ranges of the eps/delta/C/c parameters are enforced by the plan
  // constructors so their error messages stay authoritative.
}

struct TesterTrial {
  std::uint64_t trial = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t oracle_seed = 0;
  InstanceLabel label = InstanceLabel::Close;
  double exact_tail = 0.0;
  Decision decision = Decision::CloseToLocal;
  double estimated_tail_mass = 0.0;
  bool success = false;
  QueryLedger ledger;
};

struct LearnerTrial {
  std::uint64_t trial = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t oracle_seed = 0;
  std::uint64_t support_size = 0;
  double exact_distance = 0.0;  // ||H - H''||_2 against the hidden truth
  double budget_total = 0.0;    // a-priori bound on its square
  bool success = false;         // exact_distance <= target error
  QueryLedger ledger;
};

/**
 * A completed run: the config echo, one row per trial (exactly one of the
 * two vectors is populated), and aggregates recomputable from the rows.
 */
struct ExperimentRecord {
  ExperimentConfig config;
  std::vector<TesterTrial> tester_trials;
  std::vector<LearnerTrial> learner_trials;
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  WilsonInterval wilson;  // 95% interval on the success rate
  double mean_queries = 0.0;
  double mean_evolution_time = 0.0;
  double duration_seconds = 0.0;  // wall clock; JSON only, never CSV
};

namespace detail {

inline constexpr std::uint64_t kOracleSeedTag = 0xAC1E5EED;

// Fixed-format double rendering for CSV rows: %.17g always round-trips and
// never depends on locale or stream state.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline double learner_target_error(const ExperimentConfig& cfg) {
  return cfg.target_error > 0.0 ? cfg.target_error : cfg.eps;
}

}  // namespace detail

inline ExperimentRecord run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.kind == ExperimentKind::Verify)
    throw ConfigError(
        "run_experiment: the verify suite runs named checks, not trials");
  const auto start = std::chrono::steady_clock::now();

  ExperimentRecord rec;
  rec.config = cfg;

  if (cfg.kind == ExperimentKind::Tester) {
    const TesterPlan plan = compute_plan(cfg.eps1, cfg.eps2, cfg.delta, cfg.k, cfg.c);
    detail::effective_samples(plan, cfg.m);  // fail fast before spawning work
    rec.tester_trials.resize(cfg.trials);
    parallel_for_indexed(cfg.trials, [&](std::uint64_t i) {
      const std::uint64_t instance_seed = cfg.seed + i;
      const InstanceLabel label =
          i % 2 == 0 ? InstanceLabel::Close : InstanceLabel::Far;
      PlantedInstance inst = planted_instance(cfg.n, cfg.k, cfg.eps1, cfg.eps2,
                                              label, instance_seed);
      const std::uint64_t oracle_seed =
          derive_seed(instance_seed, detail::kOracleSeedTag);
      EvolutionOracle oracle(std::move(inst.hamiltonian), oracle_seed);
      TestVerdict v = test_locality(oracle, plan, cfg.m);
      rec.tester_trials[i] = TesterTrial{
          i,
          instance_seed,
          oracle_seed,
          label,
          inst.exact_tail,
          v.decision,
          v.estimated_tail_mass,
          (v.decision == Decision::FarFromLocal) == (label == InstanceLabel::Far),
          v.ledger};
    });
    for (const TesterTrial& row : rec.tester_trials) {
      rec.successes += row.success ? 1 : 0;
      rec.mean_queries += static_cast<double>(row.ledger.queries);
      rec.mean_evolution_time += row.ledger.evolution_time;
    }
  } else {
    const LearnerPlan plan =
        cfg.mode == PlanMode::Theory
            ? theory_parameters(cfg.k, cfg.eps, cfg.delta, cfg.C, cfg.c)
            : practical_parameters(cfg.k, cfg.eps, cfg.delta, cfg.C, cfg.c,
                                   cfg.alpha, cfg.gamma, cfg.beta, cfg.m1);
    if (plan.m1 > kMaxRunnableSamples)
      throw PlanInfeasible(
          "learner: m1 = " + std::to_string(plan.m1_exact) +
          " exceeds the runnable budget; use practical mode overrides "
          "(this voids the learning guarantee)");
    const double target = detail::learner_target_error(cfg);
    rec.learner_trials.resize(cfg.trials);
    parallel_for_indexed(cfg.trials, [&](std::uint64_t i) {
      const std::uint64_t instance_seed = cfg.seed + i;
      Hamiltonian target_h = random_k_local(cfg.n, cfg.k, cfg.density, instance_seed);
      const std::uint64_t oracle_seed =
          derive_seed(instance_seed, detail::kOracleSeedTag);
      EvolutionOracle oracle(target_h, oracle_seed);
      LearnedHamiltonian learned = learn(oracle, plan);
      const double dist =
          two_norm_distance(target_h.spectrum(), learned.coefficients);
      rec.learner_trials[i] = LearnerTrial{
          i,
          instance_seed,
          oracle_seed,
          learned.detection.support.size(),
          dist,
          learned.budget.total(),
          dist <= target,
          learned.ledger};
    });
    for (const LearnerTrial& row : rec.learner_trials) {
      rec.successes += row.success ? 1 : 0;
      rec.mean_queries += static_cast<double>(row.ledger.queries);
      rec.mean_evolution_time += row.ledger.evolution_time;
    }
  }

  const double trials = static_cast<double>(cfg.trials);
  rec.success_rate = static_cast<double>(rec.successes) / trials;
  rec.wilson = wilson_interval(rec.successes, cfg.trials);
  rec.mean_queries /= trials;
  rec.mean_evolution_time /= trials;
  rec.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

// ---------------------------------------------------------------------------
// CSV rendering (one row per trial; byte-identical for identical records)
// ---------------------------------------------------------------------------

inline std::string csv_header(ExperimentKind kind) {
  if (kind == ExperimentKind::Tester)
    return "trial,instance_seed,oracle_seed,label,exact_tail,decision,"
           "estimated_tail_mass,success,queries,evolution_time";
  return "trial,instance_seed,oracle_seed,support_size,exact_distance,"
         "budget_total,success,queries,evolution_time";
}

inline std::string to_csv(const ExperimentRecord& rec) {
  std::string out = csv_header(rec.config.kind) + "\n";
  if (rec.config.kind == ExperimentKind::Tester) {
    for (const TesterTrial& r : rec.tester_trials) {
      out += std::to_string(r.trial) + ',' + std::to_string(r.instance_seed) +
             ',' + std::to_string(r.oracle_seed) + ',' + to_string(r.label) +
             ',' + detail::format_double(r.exact_tail) + ',' +
             to_string(r.decision) + ',' +
             detail::format_double(r.estimated_tail_mass) + ',' +
             (r.success ? "1" : "0") + ',' + std::to_string(r.ledger.queries) +
             ',' + detail::format_double(r.ledger.evolution_time) + '\n';
    }
  } else {
    for (const LearnerTrial& r : rec.learner_trials) {
      out += std::to_string(r.trial) + ',' + std::to_string(r.instance_seed) +
             ',' + std::to_string(r.oracle_seed) + ',' +
             std::to_string(r.support_size) + ',' +
             detail::format_double(r.exact_distance) + ',' +
             detail::format_double(r.budget_total) + ',' +
             (r.success ? "1" : "0") + ',' + std::to_string(r.ledger.queries) +
             ',' + detail::format_double(r.ledger.evolution_time) + '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON rendering
// ---------------------------------------------------------------------------

inline json to_json(const ExperimentConfig& cfg) {
  return json{{"C", cfg.C},
              {"alpha", cfg.alpha},
              {"beta", cfg.beta},
              {"c", cfg.c},
              {"delta", cfg.delta},
              {"density", cfg.density},
              {"eps", cfg.eps},
              {"eps1", cfg.eps1},
              {"eps2", cfg.eps2},
              {"gamma", cfg.gamma},
              {"k", cfg.k},
              {"kind", to_string(cfg.kind)},
              {"m", cfg.m},
              {"m1", cfg.m1},
              {"mode", to_string(cfg.mode)},
              {"n", cfg.n},
              {"out", cfg.out},
              {"seed", cfg.seed},
              {"target_error", cfg.target_error},
              {"trials", cfg.trials}};
}

/// Parses a config document; every field except "kind" falls back to the
/// struct's default, so minimal hand-written configs stay valid.
inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  cfg.n = j.value("n", cfg.n);
  cfg.k = j.value("k", cfg.k);
  cfg.eps1 = j.value("eps1", cfg.eps1);
  cfg.eps2 = j.value("eps2", cfg.eps2);
  cfg.eps = j.value("eps", cfg.eps);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.C = j.value("C", cfg.C);
  cfg.c = j.value("c", cfg.c);
  cfg.density = j.value("density", cfg.density);
  if (j.contains("mode"))
    cfg.mode = plan_mode_from_string(j.at("mode").get<std::string>());
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.m1 = j.value("m1", cfg.m1);
  cfg.m = j.value("m", cfg.m);
  cfg.target_error = j.value("target_error", cfg.target_error);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out = j.value("out", cfg.out);
  return cfg;
}

inline json to_json(const TesterTrial& r) {
  return json{{"decision", to_string(r.decision)},
              {"estimated_tail_mass", r.estimated_tail_mass},
              {"exact_tail", r.exact_tail},
              {"instance_seed", r.instance_seed},
              {"label", to_string(r.label)},
              {"ledger", to_json(r.ledger)},
              {"oracle_seed", r.oracle_seed},
              {"success", r.success},
              {"trial", r.trial}};
}

inline json to_json(const LearnerTrial& r) {
  return json{{"budget_total", r.budget_total},
              {"exact_distance", r.exact_distance},
              {"instance_seed", r.instance_seed},
              {"ledger", to_json(r.ledger)},
              {"oracle_seed", r.oracle_seed},
              {"success", r.success},
              {"support_size", r.support_size},
              {"trial", r.trial}};
}

inline json to_json(const ExperimentRecord& rec) {
  json trials = json::array();
  for (const TesterTrial& r : rec.tester_trials) trials.push_back(to_json(r));
  for (const LearnerTrial& r : rec.learner_trials) trials.push_back(to_json(r));
  return json{{"aggregates",
               json{{"mean_evolution_time", rec.mean_evolution_time},
                    {"mean_queries", rec.mean_queries},
                    {"success_rate", rec.success_rate},
                    {"successes", rec.successes},
                    {"wilson95_lower", rec.wilson.lower},
                    {"wilson95_upper", rec.wilson.upper}}},
              {"config", to_json(rec.config)},
              {"duration_seconds", rec.duration_seconds},
              {"trials", std::move(trials)}};
}

// ---------------------------------------------------------------------------
// Human-readable aggregate table and gnuplot emission
// ---------------------------------------------------------------------------

inline std::string format_aggregate_table(const ExperimentRecord& rec) {
  auto line = [](const std::string& key, const std::string& value) {
    std::string out = "  " + key;
    out.append(key.size() < 22 ? 22 - key.size() : 1, ' ');
    return out + value + "\n";
  };
  std::string out;
  out += line("kind", to_string(rec.config.kind));
  out += line("trials", std::to_string(rec.config.trials));
  out += line("seed", std::to_string(rec.config.seed));
  out += line("successes", std::to_string(rec.successes));
  out += line("success rate", detail::format_double(rec.success_rate));
  out += line("wilson 95%",
              "[" + detail::format_double(rec.wilson.lower) + ", " +
                  detail::format_double(rec.wilson.upper) + "]");
  out += line("mean queries", detail::format_double(rec.mean_queries));
  out += line("mean evolution time", detail::format_double(rec.mean_evolution_time));
  out += line("duration (s)", detail::format_double(rec.duration_seconds));
  return out;
}

/// Whitespace-separated copy of the CSV for direct gnuplot consumption.
inline std::string gnuplot_data(const ExperimentRecord& rec) {
  std::string csv = to_csv(rec);
  std::string out = "# ";  // comments out the header line only
  for (char ch : csv) out += ch == ',' ? ' ' : ch;
  return out;
}

/// A minimal plot script for the emitted data file: per-trial statistic with
/// the configured decision threshold drawn as a horizontal line.
inline std::string gnuplot_stub(const ExperimentRecord& rec) {
  const bool tester = rec.config.kind == ExperimentKind::Tester;
  double threshold;
  if (tester)
    threshold =
        compute_plan(rec.config.eps1, rec.config.eps2, rec.config.delta,
                     rec.config.k, rec.config.c)
            .threshold;
  else
    threshold = detail::learner_target_error(rec.config);
  std::string out;
  out += "set terminal pngcairo size 900,600\n";
  out += "set output 'experiment.png'\n";
  out += "set xlabel 'trial'\n";
  out += tester ? "set ylabel 'estimated tail mass'\n"
                : "set ylabel 'two-norm error'\n";
  out += "plot 'plot.dat' using 1:" + std::string(tester ? "7" : "5") +
         " with points pt 7 title 'trials', " +
         detail::format_double(threshold) + " with lines title 'threshold'\n";
  return out;
}

}  // namespace pauliprobe
