#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "fracpq/cli_io.hpp"
#include "fracpq/error.hpp"

using namespace fracpq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConvergence = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerifyFailed = 3;

std::map<std::string, std::string> read_env() {
  std::map<std::string, std::string> env;
  if (const char* dir = std::getenv("FRACPQ_OUTPUT_DIR")) env["FRACPQ_OUTPUT_DIR"] = dir;
  return env;
}

double resolve_lambda(RunConfig& c, const Grid& grid, const KernelPair& k) {
  if (c.params.lambda) return *c.params.lambda;
  const EigenPair first = solve_lambda1_q(k.q, grid, c.params.q, c.solver);
  c.params.lambda = *c.lambda_factor * first.lambda;
  std::printf("lambda_1(s2, q) = %.17g, lambda = %.17g\n", first.lambda, *c.params.lambda);
  return *c.params.lambda;
}

void print_pair(const char* label, const EigenPair& pair) {
  std::printf("%s: lambda = %.17g  rho = %.6g  residual = %.3g  iterations = %d  converged = %s%s\n", label,
              pair.lambda, pair.rho, pair.residual, pair.iterations, pair.converged ? "yes" : "no",
              pair.trivial ? "  (trivial)" : "");
}

std::vector<std::string> csv_comments(const RunConfig& c) {
  std::vector<std::string> lines = {"command: " + c.command()};
  for (const auto& [key, source] : c.provenance) lines.push_back(key + " = " + c.values.at(key) + " [" + source + "]");
  return lines;
}

int run(RunConfig& c) {
  for (const std::string& w : c.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  if (c.mode == Mode::verify) {
    const SuiteConfig suite =
        c.verify_config.empty() ? SuiteConfig::defaults() : SuiteConfig::from_file(KeyValueFile::load(c.verify_config));
    const VerificationReport report = run_all(suite);
    const std::string text_path = c.output_path(".txt");
    const std::string json_path = c.output_path(".json");
    emit_report(report, text_path, json_path, c.timings);
    std::fputs(report_text(report, c.timings).c_str(), stdout);
    std::printf("wrote %s and %s\n", text_path.c_str(), json_path.c_str());
    return report.overall_pass ? kExitOk : kExitVerifyFailed;
  }

  const Grid grid = build_grid(c.a, c.b, c.n);
  const KernelPair k = build_kernels(grid, c.params);

  switch (c.mode) {
    case Mode::eig1: {
      const EigenPair pair = solve_lambda1_q(k.q, grid, c.params.q, c.solver);
      print_pair("lambda_1(s2, q)", pair);
      emit_eigenpair_json(pair, c, c.output_path(".json"));
      std::printf("wrote %s\n", c.output_path(".json").c_str());
      return pair.converged ? kExitOk : kExitNoConvergence;
    }
    case Mode::fixed_lambda:
    case Mode::nehari:
    case Mode::fixed_rho: {
      EigenPair pair;
      if (c.mode == Mode::fixed_rho) {
        pair = solve_fixed_rho(c.params, *c.params.rho, k, c.solver);
      } else {
        resolve_lambda(c, grid, k);
        pair = c.mode == Mode::nehari ? solve_nehari(c.params, k, c.solver)
                                      : solve_fixed_lambda_coercive(c.params, k, c.solver);
      }
      print_pair(to_string(c.mode), pair);
      emit_eigenpair_json(pair, c, c.output_path(".json"));
      std::printf("wrote %s\n", c.output_path(".json").c_str());
      return pair.converged ? kExitOk : kExitNoConvergence;
    }
    case Mode::probe: {
      const double lambda = resolve_lambda(c, grid, k);
      const ProbeResult probe = multiplicity_probe(c.params, lambda, grid, k, c.solver);
      std::printf("levels: constant-sign %.17g, odd %.17g\n", probe.level_constant_sign, probe.level_odd);
      for (const EigenPair& pair : probe.pairs) print_pair(pair.heuristic ? "odd pair" : "constant-sign pair", pair);
      for (const std::string& note : probe.notes) std::printf("note: %s\n", note.c_str());
      emit_eigenpairs_json(probe.pairs, c, c.output_path(".json"), probe.notes);
      std::printf("wrote %s\n", c.output_path(".json").c_str());
      return kExitOk;
    }
    case Mode::branch_zero:
    case Mode::branch_infinity: {
      const std::vector<double> rhos = geometric_rho_grid(c.rho_max, c.rho_min, c.per_decade);
      const Branch branch = c.mode == Mode::branch_zero ? trace_branch_zero(c.params, rhos, k, c.solver)
                                                        : trace_branch_infinity(c.params, rhos, k, c.solver);
      const EigenPair first = solve_lambda1_q(k.q, grid, c.params.q, c.solver);
      std::vector<std::string> comments = csv_comments(c);
      comments.push_back("lambda_1(s2, q) = " + format_double(first.lambda));
      bool all_converged = true;
      for (const BranchPoint& pt : branch) all_converged = all_converged && pt.converged;
      std::printf("lambda_1(s2, q) = %.17g\n", first.lambda);
      std::printf("%12s %22s %12s %12s %10s\n", "rho", "lambda", "seminorm_p", "norm_s2q", "residual");
      for (const BranchPoint& pt : branch) {
        std::printf("%12.4g %22.15g %12.5g %12.5g %10.2g%s\n", pt.rho, pt.lambda, pt.seminorm_p, pt.norm_s2q,
                    pt.residual, pt.converged ? "" : "  not converged");
      }
      try {
        const RateFit fit = fit_rate(branch, first.lambda);
        std::printf("gap ~ %.4g rho^%.4f  (R^2 = %.6f, %d points)\n", fit.prefactor, fit.exponent, fit.r_squared,
                    fit.points_used);
        comments.push_back("fitted exponent = " + format_double(fit.exponent));
      } catch (const Error& e) {
        std::printf("no rate fit: %s\n", e.what());
      }
      emit_branch_csv(branch, c.output_path(".csv"), comments);
      std::printf("wrote %s\n", c.output_path(".csv").c_str());
      return all_converged ? kExitOk : kExitNoConvergence;
    }
    case Mode::verify: break;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (const std::string& a : args) {
    if (a == "--help" || a == "-h" || a == "help") {
      std::fputs(help_text().c_str(), stdout);
      return kExitOk;
    }
  }
  try {
    RunConfig config = parse_config(args, read_env());
    return run(config);
  } catch (const Error& e) {
    std::fprintf(stderr, "fracpq: %s\n", e.what());
    switch (e.code()) {
      case ErrorCode::infeasible_lambda:
      case ErrorCode::not_above_cone: return kExitNoConvergence;
      default: return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fracpq: %s\n", e.what());
    return kExitConfig;
  }
}
