#include <algorithm>
#include <string>

#include "doctest.h"
#include "fracpq/cli_io.hpp"
#include "fracpq/error.hpp"
#include "fracpq/verify.hpp"

using namespace fracpq;

namespace {

const std::string kDefaultConf = std::string(FRACPQ_SOURCE_DIR) + "/configs/verify_default.conf";

SuiteConfig only(std::vector<std::string> checks) {
  SuiteConfig c = SuiteConfig::defaults();
  c.checks = std::move(checks);
  return c;
}

}  // namespace

TEST_CASE("compiled defaults match the shipped config file") {
  const KeyValueFile file = KeyValueFile::load(kDefaultConf);
  CHECK(file.unknown_keys(SuiteConfig::known_keys()).empty());
  for (const std::string& key : SuiteConfig::known_keys()) {
    CAPTURE(key);
    CHECK(file.has(key));
  }
  CHECK(SuiteConfig::from_file(file).to_text() == SuiteConfig::defaults().to_text());
  CHECK(SuiteConfig::defaults().checks == check_registry());
}

TEST_CASE("registry order") {
  const std::vector<std::string>& names = check_registry();
  REQUIRE(names.size() == 11);
  CHECK(names.front() == "oracle_equivalence");
  CHECK(names.back() == "multiplicity_probe");
}

TEST_CASE("config file errors") {
  CHECK_THROWS_AS(SuiteConfig::from_file(KeyValueFile::parse("no_such_key = 1\n")), Error);
  CHECK_THROWS_AS(SuiteConfig::from_file(KeyValueFile::parse("checks = oracle_equivalence, bogus\n")), Error);
  CHECK_THROWS_AS(SuiteConfig::from_file(KeyValueFile::parse("linear.n = many\n")), Error);
  CHECK_THROWS_AS(KeyValueFile::parse("a = 1\na = 2\n"), Error);
  try {
    SuiteConfig::from_file(KeyValueFile::parse("linear.n = many\n"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("linear.n") != std::string::npos);
  }
  const SuiteConfig partial = SuiteConfig::from_file(KeyValueFile::parse("# comment\n\nlinear.n = 32\n"));
  CHECK(partial.linear_n == 32);
  CHECK(partial.gradient_n == SuiteConfig::defaults().gradient_n);
}

TEST_CASE("empty check list passes vacuously with a warning") {
  const VerificationReport r = run_all(only({}));
  CHECK(r.overall_pass);
  CHECK(r.checks.empty());
  REQUIRE(r.warnings.size() == 1);
}

TEST_CASE("a subset run is byte-identical across repeats") {
  const SuiteConfig c = only({"oracle_equivalence", "gradient_check", "vector_inequalities"});
  const VerificationReport a = run_all(c);
  const VerificationReport b = run_all(c);
  REQUIRE(a.checks.size() == 3);
  CHECK(a.overall_pass);
  CHECK(report_text(a) == report_text(b));
  CHECK(report_json(a).dump() == report_json(b).dump());
  CHECK(report_text(a).find("runtime") == std::string::npos);
}

TEST_CASE("a crashing check fails without stopping the suite") {
  SuiteConfig c = only({"gradient_check", "nonexistence", "oracle_equivalence"});
  c.nonexistence_n = 1;
  const VerificationReport r = run_all(c);
  REQUIRE(r.checks.size() == 3);
  CHECK(!r.overall_pass);
  const auto crashed = std::find_if(r.checks.begin(), r.checks.end(), [](const CheckResult& x) { return x.name == "nonexistence"; });
  REQUIRE(crashed != r.checks.end());
  CHECK(!crashed->pass);
  CHECK(crashed->note.find("crashed") != std::string::npos);
  for (const CheckResult& x : r.checks) {
    if (x.name != "nonexistence") CHECK(x.pass);
  }
}

TEST_CASE("lq_separation") {
  Field u(4);
  u << 1.0, -2.0, 3.0, 0.5;
  CHECK(lq_separation(u, Field(-u), 0.25, 3.0) == 0.0);
  CHECK(lq_separation(u, Field(2.0 * u), 0.25, 3.0) == doctest::Approx(0.5));
  CHECK(lq_separation(Field::Zero(4), Field::Zero(4), 0.25, 3.0) == 0.0);
}

TEST_CASE("multiplicity probe counts pairs by lambda") {
  const SpectralParams params{0.4, 0.7, 2.0, 3.0, std::nullopt, std::nullopt};
  const Grid g = build_grid(-1.0, 1.0, 32);
  const KernelPair k = build_kernels(g, params);
  const SolveConfig cfg;

  const ProbeResult below = multiplicity_probe(params, 1.0, g, k, cfg);
  CHECK(below.pairs.empty());
  const double l1 = below.level_constant_sign;
  const double l2 = below.level_odd;
  REQUIRE(l2 > l1);
  CHECK(1.0 < l1);

  const ProbeResult between = multiplicity_probe(params, 0.5 * (l1 + l2), g, k, cfg);
  CHECK(between.pairs.size() == 1);

  const ProbeResult above = multiplicity_probe(params, 1.5 * l2, g, k, cfg);
  REQUIRE(above.pairs.size() == 2);
  CHECK(lq_separation(above.pairs[0].u, above.pairs[1].u, g.h, 3.0) > 1e-3);
  CHECK(above.pairs[1].heuristic);

  Grid skew = g;
  skew.nodes[3] += 1e-3;
  CHECK_THROWS_AS(multiplicity_probe(params, 2.0 * l1, skew, k, cfg), Error);
}
