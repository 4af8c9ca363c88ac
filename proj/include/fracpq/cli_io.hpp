#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracpq/bifurcation.hpp"
#include "fracpq/verify.hpp"

namespace fracpq {

enum class Mode { eig1, fixed_lambda, fixed_rho, nehari, branch_zero, branch_infinity, verify, probe };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct RunConfig {
  Mode mode = Mode::eig1;
  double a = -1.0;
  double b = 1.0;
  int n = 256;
  SpectralParams params;
  /// lambda as a multiple of the computed lambda_1(s2, q); used when lambda is unset.
  std::optional<double> lambda_factor;
  SolveConfig solver;
  double rho_max = 1e-1;
  double rho_min = 1e-4;
  int per_decade = 4;
  std::string output;      // output file; derived from mode and output_dir when empty
  std::string output_dir;  // default: $FRACPQ_OUTPUT_DIR, else "."
  std::string verify_config;
  bool timings = false;

  /// Effective value and its source ("default", "env", "file:<path>", "flag") per key.
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> provenance;
  std::vector<std::string> warnings;

  /// Equivalent command line reproducing this configuration.
  std::string command() const;
  /// Output path for this run; `suffix` replaces the extension for sidecar files.
  std::string output_path(const std::string& extension) const;
};

/// Keys accepted both as --flags and in config files, in help order.
const std::vector<std::string>& config_keys();

/// Parses `fracpq [mode] [--flags]` with an optional `--config file`.
/// Precedence: compiled default < environment < file < flag. `env` maps
/// variable names to values; only FRACPQ_OUTPUT_DIR is read.
/// Throws malformed-config or regime-mismatch.
RunConfig parse_config(const std::vector<std::string>& args, const std::map<std::string, std::string>& env = {});

/// Usage text listing every key with its default.
std::string help_text();

// Outputs ---------------------------------------------------------------------

/// CSV columns rho,lambda,seminorm_p,norm_s2q,residual,converged with
/// 17-significant-digit floats. `comments` go first as "# " lines.
std::string branch_csv(const Branch& branch, const std::vector<std::string>& comments = {});
void emit_branch_csv(const Branch& branch, const std::string& path, const std::vector<std::string>& comments = {});

nlohmann::json eigenpair_json(const EigenPair& pair, const RunConfig& config);
void emit_eigenpair_json(const EigenPair& pair, const RunConfig& config, const std::string& path);
void emit_eigenpairs_json(const std::vector<EigenPair>& pairs, const RunConfig& config, const std::string& path,
                          const std::vector<std::string>& notes = {});

/// Recomputes the stored weak-form residual from the embedded parameters,
/// grid and field of one eigenpair document.
double recompute_residual(const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

/// Report without runtimes unless `timings` is set, so that equal seeds give
/// equal bytes.
std::string report_text(const VerificationReport& report, bool timings = false);
nlohmann::json report_json(const VerificationReport& report, bool timings = false);
void emit_report(const VerificationReport& report, const std::string& text_path, const std::string& json_path,
                 bool timings = false);

void write_file(const std::string& path, const std::string& contents);

}  // namespace fracpq
