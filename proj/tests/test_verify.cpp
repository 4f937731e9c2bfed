#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <pauliprobe/verify.hpp>

using namespace pauliprobe;

TEST_CASE("quick verification suite passes with the expected checks",
          "[verify]") {
  VerifyReport report = verify_suite();
  REQUIRE(report.level == VerifyLevel::Quick);
  REQUIRE(report.all_pass());

  const std::vector<std::string> expected{
      "parseval",        "transform-equivalence", "round-trip",
      "claim-close-ceiling", "claim-far-floor",   "taylor-remainder",
      "first-order-residual", "bh-bound",         "sampler-tv",
      "estimator-calibration"};
  REQUIRE(report.checks.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    REQUIRE(report.checks[i].name == expected[i]);
    REQUIRE(report.checks[i].pass);
    REQUIRE(report.checks[i].threshold > 0.0);
  }

  // The report names every check with its measured value and threshold.
  std::string text = format_report(report);
  for (const std::string& name : expected)
    REQUIRE(text.find(name) != std::string::npos);
  REQUIRE(text.find("measured") != std::string::npos);
  REQUIRE(text.find("threshold") != std::string::npos);
  REQUIRE(text.find("10/10 checks passed") != std::string::npos);
}

TEST_CASE("a corrupted transform fails exactly the equivalence check",
          "[verify]") {
  VerifyOptions opts;
  opts.transform = [](const Eigen::MatrixXcd& m) {
    PauliSpectrum honest = spectrum_from_dense(m);
    auto entries = honest.entries();
    if (!entries.empty()) entries.front().second += cplx(1e-3, 0.0);
    return PauliSpectrum(honest.n(), std::move(entries));
  };
  VerifyReport report = verify_suite(opts);
  REQUIRE_FALSE(report.all_pass());
  for (const CheckResult& c : report.checks) {
    if (c.name == "transform-equivalence") {
      REQUIRE_FALSE(c.pass);
      REQUIRE(c.measured >= 1e-3 - 1e-9);
    } else {
      REQUIRE(c.pass);
    }
  }
  REQUIRE(format_report(report).find("FAIL transform-equivalence") !=
          std::string::npos);
}

TEST_CASE("verify levels parse and full scales the sample counts", "[verify]") {
  REQUIRE(verify_level_from_string("quick") == VerifyLevel::Quick);
  REQUIRE(verify_level_from_string("full") == VerifyLevel::Full);
  REQUIRE_THROWS_AS(verify_level_from_string("exhaustive"), ConfigError);
  REQUIRE(std::string(to_string(VerifyLevel::Full)) == "full");
}
