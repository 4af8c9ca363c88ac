#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fracpq/bifurcation.hpp"
#include "fracpq/keyvalue.hpp"

namespace fracpq {

struct CheckResult {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> thresholds;
  bool pass = false;
  double runtime_seconds = 0.0;
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool overall_pass = true;
  std::uint64_t seed = 0;
  std::string grid_summary;
  std::vector<std::string> warnings;
};

/// Parameter tuple (s1, s2, p, q) written as "s1/s2/p/q" in config files.
struct Tuple {
  double s1, s2, p, q;

  SpectralParams params() const { return SpectralParams{s1, s2, p, q, std::nullopt, std::nullopt}; }
};

/// Instances and thresholds of the verification suite. defaults() matches
/// configs/verify_default.conf key for key.
struct SuiteConfig {
  std::uint64_t seed = 0;
  std::vector<std::string> checks;
  double a = -1.0;
  double b = 1.0;
  int max_iterations = 400;
  double tolerance = 1e-10;
  int restarts = 1;

  int oracle_max_n = 16;
  int oracle_fields = 20;
  std::vector<double> oracle_s = {0.5, 0.3, 0.7};
  std::vector<double> oracle_r = {2.0, 1.5, 3.0};
  double oracle_tolerance = 1e-12;

  int linear_n = 256;
  double linear_s = 0.5;
  double linear_tolerance = 1e-8;

  int gradient_n = 32;
  int gradient_pairs = 50;
  double gradient_s = 0.5;
  std::vector<double> gradient_r = {1.5, 2.0, 3.0};
  double gradient_epsilon = 1e-6;
  double gradient_tolerance = 1e-5;

  int nonexistence_n = 128;
  std::vector<double> nonexistence_factors = {0.5, 0.9, 1.0};
  Tuple nonexistence_coercive = {0.7, 0.4, 3.0, 2.0};
  Tuple nonexistence_nehari = {0.4, 0.7, 2.0, 3.0};
  double nonexistence_mass_tolerance = 1e-12;

  int constant_sign_n = 64;
  double constant_sign_lambda_factor = 2.0;
  std::vector<Tuple> constant_sign_coercive = {
      {0.7, 0.4, 3.0, 2.0}, {0.6, 0.3, 2.5, 2.0}, {0.8, 0.5, 4.0, 3.0}, {0.5, 0.2, 3.0, 2.5}, {0.9, 0.6, 3.0, 2.0}};
  std::vector<Tuple> constant_sign_nehari = {
      {0.4, 0.7, 2.0, 3.0}, {0.3, 0.6, 2.0, 2.5}, {0.5, 0.8, 3.0, 4.0}, {0.2, 0.5, 2.5, 3.0}, {0.6, 0.9, 2.0, 3.0}};
  double constant_sign_tolerance = 1e-10;

  int nehari_n = 64;
  Tuple nehari_params = {0.4, 0.7, 2.0, 3.0};
  double nehari_lambda_factor = 2.0;
  int nehari_samples = 20;
  std::vector<double> nehari_scales = {1e-3, 0.5, 7.0, 1e3};
  double nehari_membership_tolerance = 1e-10;
  double nehari_invariance_tolerance = 1e-12;

  int identity_n = 256;
  Tuple identity_coercive = {0.7, 0.4, 3.0, 2.0};
  Tuple identity_nehari = {0.4, 0.7, 2.0, 3.0};
  double identity_t_coercive = 1e3;  // sample u = e1 / t
  double identity_t_nehari = 1e-3;
  double identity_tolerance = 1e-3;
  double identity_divergence_factor = 10.0;

  int branch_n = 256;
  double branch_rho_max = 1e-1;
  double branch_rho_min = 1e-4;
  int branch_per_decade = 4;
  double branch_margin = 0.15;
  Tuple branch_zero_params = {0.7, 0.4, 3.0, 2.0};
  double branch_zero_gap_fraction = 0.05;
  double branch_zero_decay_factor = 10.0;
  Tuple branch_infinity_params = {0.4, 0.7, 2.0, 3.0};
  double branch_infinity_growth_factor = 10.0;
  double branch_infinity_noise_band = 0.05;

  int inequality_lattice = 1000;
  std::int64_t inequality_random = 1000000;
  std::vector<double> inequality_r = {1.5, 3.0, 4.0};
  double inequality_bound = 10.0;
  double inequality_slack = 1e-13;

  int multiplicity_n = 64;
  Tuple multiplicity_params = {0.4, 0.7, 2.0, 3.0};
  double multiplicity_above_factor = 1.5;  // lambda above both levels = factor * level 2
  double multiplicity_separation = 1e-3;

  static SuiteConfig defaults();
  /// Keys absent from the file keep their defaults; unknown keys are errors.
  static SuiteConfig from_file(const KeyValueFile& file);
  static std::vector<std::string> known_keys();
  /// One `key = value` line per key, in binding order.
  std::string to_text() const;

  SolveConfig solver() const;
};

/// Names of all checks in reporting order.
const std::vector<std::string>& check_registry();

/// Runs one check; exceptions become a failed result with the message as note.
CheckResult run_check(const std::string& name, const SuiteConfig& config);

/// Runs config.checks in registry order. An empty list passes vacuously with
/// a warning.
VerificationReport run_all(const SuiteConfig& config);

struct ProbeResult {
  std::vector<EigenPair> pairs;  // one representative per +- pair
  double level_constant_sign = 0.0;
  double level_odd = 0.0;
  std::vector<std::string> notes;
};

/// Looks for the constant-sign critical pair and an odd pair at the given
/// lambda. Coercive tuples use global minimisation of F_lambda, Nehari tuples
/// minimisation on the Nehari set; the odd pair is searched in the odd
/// subspace of a symmetric grid.
ProbeResult multiplicity_probe(const SpectralParams& params, double lambda, const Grid& grid, const KernelPair& kernels,
                               const SolveConfig& cfg, double separation = 1e-3);

/// Relative L^q distance between |u| and |v|, scaled by the larger norm.
double lq_separation(const Field& u, const Field& v, double h, double q);

}  // namespace fracpq
