#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <pauliprobe/experiment.hpp>
#include <pauliprobe/serialize.hpp>
#include <pauliprobe/verify.hpp>

namespace {

using namespace pauliprobe;

// Exit codes, part of the CLI contract.
constexpr int kOk = 0;
constexpr int kVerifyFailure = 1;
constexpr int kBadConfig = 2;
constexpr int kInfeasiblePlan = 3;

constexpr const char* kFooter = R"(CSV schemas (one row per trial, doubles as %.17g):
  test:  trial,instance_seed,oracle_seed,label,exact_tail,decision,
         estimated_tail_mass,success,queries,evolution_time
  learn: trial,instance_seed,oracle_seed,support_size,exact_distance,
         budget_total,success,queries,evolution_time

Environment: PAULIPROBE_THREADS caps the trial worker pool (default: cores).
Exit codes: 0 ok, 1 verification failure, 2 invalid config, 3 infeasible plan.
)";

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw ConfigError("failed writing " + path.string());
}

ExperimentConfig load_config_file(const std::string& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  ExperimentConfig cfg = config_from_json(json::parse(in));
  if (cfg.kind != kind)
    throw ConfigError("config file kind \"" + std::string(to_string(cfg.kind)) +
                      "\" does not match the subcommand");
  return cfg;
}

void run_and_persist(const ExperimentConfig& cfg, bool gnuplot) {
  if (gnuplot && cfg.out.empty())
    throw ConfigError("--gnuplot-stub needs --out to know where to write");
  ExperimentRecord rec = run_experiment(cfg);
  std::cout << format_aggregate_table(rec);
  if (!cfg.out.empty()) {
    std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    write_file(dir / "record.json", to_json(rec).dump(2) + "\n");
    write_file(dir / "trials.csv", to_csv(rec));
    std::string note = "  wrote record.json, trials.csv";
    if (gnuplot) {
      write_file(dir / "plot.dat", gnuplot_data(rec));
      write_file(dir / "plot.gp", gnuplot_stub(rec));
      note += ", plot.dat, plot.gp";
    }
    std::cout << note << " to " << dir.string() << "\n";
  }
}

// Shared flag bundle: every option registers against one ExperimentConfig
// that starts at the library defaults; a --config file replaces the start
// point and explicitly passed flags then override its fields.
struct ConfigFlags {
  std::string config_path;
  CLI::Option* config_opt = nullptr;
  ExperimentConfig flags;  // values parsed from the command line
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>>
      overrides;

  template <typename T>
  void add(CLI::App* sub, const std::string& name, T ExperimentConfig::*field,
           const std::string& help) {
    CLI::Option* opt = sub->add_option(name, flags.*field, help);
    overrides.emplace_back(
        opt, [this, field](ExperimentConfig& cfg) { cfg.*field = flags.*field; });
  }

  void add_config(CLI::App* sub) {
    config_opt = sub->add_option(
        "--config", config_path,
        "JSON experiment config; inline flags override its fields");
  }

  ExperimentConfig resolve(ExperimentKind kind) const {
    ExperimentConfig cfg;
    if (config_opt != nullptr && config_opt->count() > 0)
      cfg = load_config_file(config_path, kind);
    cfg.kind = kind;
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(cfg);
    return cfg;
  }
};

void add_common_flags(CLI::App* sub, ConfigFlags& f) {
  f.add_config(sub);
  f.add(sub, "--n", &ExperimentConfig::n, "qubit count");
  f.add(sub, "--k", &ExperimentConfig::k, "locality to test or learn");
  f.add(sub, "--delta", &ExperimentConfig::delta, "failure probability budget");
  f.add(sub, "--c", &ExperimentConfig::c, "Taylor-remainder constant");
  f.add(sub, "--trials", &ExperimentConfig::trials, "number of trials (>= 1)");
  f.add(sub, "--seed", &ExperimentConfig::seed,
        "base seed; trial i uses seed+i");
  f.add(sub, "--out", &ExperimentConfig::out,
        "output directory for record.json and trials.csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pauliprobe: tolerant locality testing and learning of k-local "
      "Hamiltonians\nfrom Bell-basis queries to the time-evolution "
      "operator, with exact desk-scale verification."};
  app.footer(kFooter);
  app.require_subcommand(1);
  int exit_code = kOk;

  // --- test ---------------------------------------------------------------
  auto* test = app.add_subcommand(
      "test", "run balanced planted tester trials and report success stats");
  ConfigFlags test_flags;
  add_common_flags(test, test_flags);
  test_flags.add(test, "--eps1", &ExperimentConfig::eps1,
                 "closeness promise (0 <= eps1 < eps2)");
  test_flags.add(test, "--eps2", &ExperimentConfig::eps2, "farness promise");
  test_flags.add(test, "--m", &ExperimentConfig::m,
                 "per-trial sample override; 0 runs the full plan "
                 "(voids the 1-delta guarantee when set)");
  bool test_gnuplot = false;
  test->add_flag("--gnuplot-stub", test_gnuplot,
                 "also write plot.dat and plot.gp to --out");
  test->callback([&] {
    run_and_persist(test_flags.resolve(ExperimentKind::Tester), test_gnuplot);
  });

  // --- learn --------------------------------------------------------------
  auto* learn = app.add_subcommand(
      "learn", "learn random k-local instances and report recovery stats");
  ConfigFlags learn_flags;
  add_common_flags(learn, learn_flags);
  learn_flags.add(learn, "--eps", &ExperimentConfig::eps,
                  "target two-norm accuracy scale");
  learn_flags.add(learn, "--C", &ExperimentConfig::C,
                  "Bohnenblust-Hille constant for the error budget");
  learn_flags.add(learn, "--density", &ExperimentConfig::density,
                  "expected fraction of weight<=k strings in random instances");
  learn_flags.add(learn, "--alpha", &ExperimentConfig::alpha,
                  "practical-mode evolution time override");
  learn_flags.add(learn, "--gamma", &ExperimentConfig::gamma,
                  "practical-mode detection threshold override");
  learn_flags.add(learn, "--beta", &ExperimentConfig::beta,
                  "practical-mode estimation accuracy override");
  learn_flags.add(learn, "--m1", &ExperimentConfig::m1,
                  "practical-mode stage-1 sample override");
  learn_flags.add(learn, "--target-error", &ExperimentConfig::target_error,
                  "two-norm error counted as success (default: eps)");
  std::string learn_mode = "theory";
  CLI::Option* learn_mode_opt =
      learn->add_option("--mode", learn_mode, "theory or practical")
          ->check(CLI::IsMember({"theory", "practical"}));
  bool learn_gnuplot = false;
  learn->add_flag("--gnuplot-stub", learn_gnuplot,
                  "also write plot.dat and plot.gp to --out");
  learn->callback([&] {
    ExperimentConfig cfg = learn_flags.resolve(ExperimentKind::Learner);
    if (learn_mode_opt->count() > 0) cfg.mode = plan_mode_from_string(learn_mode);
    run_and_persist(cfg, learn_gnuplot);
  });

  // --- plan ---------------------------------------------------------------
  auto* plan = app.add_subcommand(
      "plan", "print a plan and its query/evolution-time totals, without running");
  plan->require_subcommand(1);

  auto* plan_test = plan->add_subcommand("test", "tolerant-tester plan");
  ConfigFlags plan_test_flags;
  plan_test_flags.add(plan_test, "--eps1", &ExperimentConfig::eps1, "closeness promise");
  plan_test_flags.add(plan_test, "--eps2", &ExperimentConfig::eps2, "farness promise");
  plan_test_flags.add(plan_test, "--delta", &ExperimentConfig::delta, "failure budget");
  plan_test_flags.add(plan_test, "--k", &ExperimentConfig::k, "locality");
  plan_test_flags.add(plan_test, "--c", &ExperimentConfig::c, "Taylor constant");
  plan_test->callback([&] {
    ExperimentConfig cfg = plan_test_flags.resolve(ExperimentKind::Tester);
    TesterPlan p = compute_plan(cfg.eps1, cfg.eps2, cfg.delta, cfg.k, cfg.c);
    json out{{"plan", to_json(p)},
             {"totals",
              json{{"queries", p.m_samples},
                   {"evolution_time", static_cast<double>(p.m_samples) * p.alpha}}}};
    std::cout << out.dump(2) << "\n";
  });

  auto* plan_learn = plan->add_subcommand("learn", "two-stage learner plan");
  ConfigFlags plan_learn_flags;
  plan_learn_flags.add(plan_learn, "--k", &ExperimentConfig::k, "locality");
  plan_learn_flags.add(plan_learn, "--eps", &ExperimentConfig::eps, "accuracy scale");
  plan_learn_flags.add(plan_learn, "--delta", &ExperimentConfig::delta, "failure budget");
  plan_learn_flags.add(plan_learn, "--C", &ExperimentConfig::C,
                       "Bohnenblust-Hille constant");
  plan_learn_flags.add(plan_learn, "--c", &ExperimentConfig::c, "Taylor constant");
  plan_learn_flags.add(plan_learn, "--alpha", &ExperimentConfig::alpha,
                       "practical-mode override");
  plan_learn_flags.add(plan_learn, "--gamma", &ExperimentConfig::gamma,
                       "practical-mode override");
  plan_learn_flags.add(plan_learn, "--beta", &ExperimentConfig::beta,
                       "practical-mode override");
  plan_learn_flags.add(plan_learn, "--m1", &ExperimentConfig::m1,
                       "practical-mode override");
  std::string plan_learn_mode = "theory";
  plan_learn->add_option("--mode", plan_learn_mode, "theory or practical")
      ->check(CLI::IsMember({"theory", "practical"}));
  plan_learn->callback([&] {
    ExperimentConfig cfg = plan_learn_flags.resolve(ExperimentKind::Learner);
    cfg.mode = plan_mode_from_string(plan_learn_mode);
    LearnerPlan p =
        cfg.mode == PlanMode::Theory
            ? theory_parameters(cfg.k, cfg.eps, cfg.delta, cfg.C, cfg.c)
            : practical_parameters(cfg.k, cfg.eps, cfg.delta, cfg.C, cfg.c,
                                   cfg.alpha, cfg.gamma, cfg.beta, cfg.m1);
    json out{
        {"plan", to_json(p)},
        {"totals",
         json{{"stage1_queries", p.m1},
              {"stage1_evolution_time", static_cast<double>(p.m1) * p.alpha},
              {"stage2_per_coefficient",
               "m2 = ceil(4*ln(4/delta')/beta^2) queries at time alpha each, "
               "delta' = delta/(2*(support+1))"}}}};
    std::cout << out.dump(2) << "\n";
  });

  // --- verify ---------------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "run the named invariant checks against exact references");
  std::string level = "quick";
  verify->add_option("--level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  verify->callback([&] {
    VerifyOptions opts;
    opts.level = verify_level_from_string(level);
    VerifyReport report = verify_suite(opts);
    std::cout << format_report(report);
    if (!report.all_pass()) exit_code = kVerifyFailure;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  } catch (const PlanInfeasible& e) {
    std::cerr << "infeasible plan: " << e.what() << "\n";
    return kInfeasiblePlan;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kBadConfig;
  } catch (const json::exception& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadConfig;
  }
  return exit_code;
}
