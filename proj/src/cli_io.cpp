#include "fracpq/cli_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "fracpq/error.hpp"

namespace fracpq {

namespace {

struct KeySpec {
  const char* name;
  const char* default_value;
  const char* help;
};

// Defaults are kept as text so that help, provenance and the value parser
// share one table.
const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"mode", "eig1", "eig1 | fixed-lambda | fixed-rho | nehari | branch-zero | branch-infinity | verify | probe"},
      {"a", "-1", "left end of the interval"},
      {"b", "1", "right end of the interval"},
      {"n", "256", "number of cells"},
      {"s1", "0.5", "fractional order of the p-operator"},
      {"s2", "0.5", "fractional order of the q-operator"},
      {"p", "2", "exponent of the first operator"},
      {"q", "2", "exponent of the second operator and of the mass"},
      {"lambda", "", "eigenvalue parameter for fixed-lambda, nehari and probe"},
      {"lambda-factor", "", "lambda as a multiple of the computed lambda_1(s2, q)"},
      {"rho", "", "mass for fixed-rho"},
      {"rho-max", "0.1", "largest mass of a branch"},
      {"rho-min", "0.0001", "smallest mass of a branch"},
      {"per-decade", "4", "branch points per decade of mass"},
      {"max-iterations", "400", "iteration budget per solve"},
      {"step-size", "1", "initial trial step of each line search"},
      {"tolerance", "1e-10", "stationarity tolerance"},
      {"seed", "0", "seed of the random initialiser"},
      {"restarts", "1", "random restarts per solve"},
      {"armijo-shrink", "0.5", "backtracking factor"},
      {"output", "", "output file (default: <output-dir>/<mode>.<ext>)"},
      {"output-dir", ".", "directory for default output names; FRACPQ_OUTPUT_DIR overrides the default"},
      {"verify-config", "", "suite config for verify (default: compiled defaults)"},
      {"timings", "false", "include runtimes in verification reports"},
  };
  return specs;
}

std::string fmt(double v) { return format_double(v); }

std::string regime_text(const SpectralParams& sp) {
  std::ostringstream os;
  os << "(s1, s2, p, q) = (" << fmt(sp.s1) << ", " << fmt(sp.s2) << ", " << fmt(sp.p) << ", " << fmt(sp.q)
     << ") is " << to_string(sp.regime());
  return os.str();
}

void require_regime(const RunConfig& c, Regime want) {
  if (c.params.regime() == want) return;
  const char* ordering = want == Regime::coercive ? "s2 < s1 and q < p" : "s1 < s2 and p < q";
  const char* other = want == Regime::coercive ? "s1 < s2 and p < q (nehari)" : "s2 < s1 and q < p (coercive)";
  throw Error(ErrorCode::regime_mismatch, std::string("mode ") + to_string(c.mode) + " needs " + ordering + " (" +
                                              to_string(want) + "), not " + other + "; " + regime_text(c.params));
}

void apply(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "mode") c.mode = parse_mode(v);
  else if (key == "a") c.a = parse_double(v, key);
  else if (key == "b") c.b = parse_double(v, key);
  else if (key == "n") c.n = parse_int(v, key);
  else if (key == "s1") c.params.s1 = parse_double(v, key);
  else if (key == "s2") c.params.s2 = parse_double(v, key);
  else if (key == "p") c.params.p = parse_double(v, key);
  else if (key == "q") c.params.q = parse_double(v, key);
  else if (key == "lambda") c.params.lambda = v.empty() ? std::nullopt : std::optional(parse_double(v, key));
  else if (key == "lambda-factor") c.lambda_factor = v.empty() ? std::nullopt : std::optional(parse_double(v, key));
  else if (key == "rho") c.params.rho = v.empty() ? std::nullopt : std::optional(parse_double(v, key));
  else if (key == "rho-max") c.rho_max = parse_double(v, key);
  else if (key == "rho-min") c.rho_min = parse_double(v, key);
  else if (key == "per-decade") c.per_decade = parse_int(v, key);
  else if (key == "max-iterations") c.solver.max_iterations = parse_int(v, key);
  else if (key == "step-size") c.solver.step_size = parse_double(v, key);
  else if (key == "tolerance") c.solver.tolerance = parse_double(v, key);
  else if (key == "seed") c.solver.seed = parse_uint64(v, key);
  else if (key == "restarts") c.solver.restarts = parse_int(v, key);
  else if (key == "armijo-shrink") c.solver.armijo_shrink = parse_double(v, key);
  else if (key == "output") c.output = v;
  else if (key == "output-dir") c.output_dir = v;
  else if (key == "verify-config") c.verify_config = v;
  else if (key == "timings") c.timings = parse_bool(v, key);
  else throw Error(ErrorCode::malformed_config, "unknown key '" + key + "'");
}

void validate(RunConfig& c) {
  auto range = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw Error(ErrorCode::malformed_config, "key '" + key + "': " + what);
  };
  range(c.a < c.b, "b", "need a < b");
  range(c.n >= 2, "n", "need n >= 2");
  range(c.params.s1 > 0.0 && c.params.s1 < 1.0, "s1", "need 0 < s1 < 1");
  range(c.params.s2 > 0.0 && c.params.s2 < 1.0, "s2", "need 0 < s2 < 1");
  range(c.params.p > 1.0, "p", "need p > 1");
  range(c.params.q > 1.0, "q", "need q > 1");
  range(c.solver.max_iterations >= 0, "max-iterations", "need >= 0");
  range(c.solver.step_size > 0.0, "step-size", "need > 0");
  range(c.solver.tolerance > 0.0, "tolerance", "need > 0");
  range(c.solver.restarts >= 1, "restarts", "need >= 1");
  range(c.solver.armijo_shrink > 0.0 && c.solver.armijo_shrink < 1.0, "armijo-shrink", "need 0 < value < 1");
  range(c.rho_min > 0.0 && c.rho_min <= c.rho_max, "rho-min", "need 0 < rho-min <= rho-max");
  range(c.per_decade >= 1, "per-decade", "need >= 1");
  if (c.params.rho) range(*c.params.rho > 0.0, "rho", "need rho > 0");
  if (c.lambda_factor) range(*c.lambda_factor > 0.0, "lambda-factor", "need > 0");

  const bool needs_lambda = c.mode == Mode::fixed_lambda || c.mode == Mode::nehari || c.mode == Mode::probe;
  if (needs_lambda && !c.params.lambda && !c.lambda_factor) {
    throw Error(ErrorCode::malformed_config,
                std::string("key 'lambda': mode ") + to_string(c.mode) + " needs lambda or lambda-factor");
  }
  if (c.mode == Mode::fixed_rho && !c.params.rho) {
    throw Error(ErrorCode::malformed_config, "key 'rho': mode fixed-rho needs rho");
  }
  switch (c.mode) {
    case Mode::fixed_lambda:
    case Mode::branch_zero: require_regime(c, Regime::coercive); break;
    case Mode::nehari:
    case Mode::branch_infinity: require_regime(c, Regime::nehari); break;
    case Mode::probe:
      if (c.params.regime() == Regime::unordered) {
        throw Error(ErrorCode::regime_mismatch,
                    "mode probe needs s2 < s1 and q < p (coercive) or s1 < s2 and p < q (nehari); " +
                        regime_text(c.params));
      }
      break;
    case Mode::fixed_rho:
      if (c.params.regime() == Regime::unordered) c.warnings.push_back("unordered parameters: " + regime_text(c.params));
      break;
    case Mode::eig1:
    case Mode::verify: break;
  }
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json params_json(const RunConfig& c) {
  nlohmann::json j = {{"s1", c.params.s1}, {"s2", c.params.s2}, {"p", c.params.p}, {"q", c.params.q}};
  j["lambda"] = c.params.lambda ? nlohmann::json(*c.params.lambda) : nlohmann::json(nullptr);
  j["rho"] = c.params.rho ? nlohmann::json(*c.params.rho) : nlohmann::json(nullptr);
  j["regime"] = to_string(c.params.regime());
  return j;
}

nlohmann::json header_json(const RunConfig& c) {
  nlohmann::json j;
  j["mode"] = to_string(c.mode);
  j["command"] = c.command();
  j["grid"] = {{"a", c.a}, {"b", c.b}, {"n", c.n}};
  j["params"] = params_json(c);
  j["seed"] = c.solver.seed;
  j["solver"] = {{"max_iterations", c.solver.max_iterations}, {"step_size", c.solver.step_size},
                 {"tolerance", c.solver.tolerance},           {"restarts", c.solver.restarts},
                 {"armijo_shrink", c.solver.armijo_shrink}};
  nlohmann::json prov = nlohmann::json::object();
  for (const auto& [key, source] : c.provenance) prov[key] = {{"value", c.values.at(key)}, {"source", source}};
  j["provenance"] = prov;
  return j;
}

nlohmann::json pair_body(const EigenPair& pair) {
  nlohmann::json j;
  j["lambda"] = pair.lambda;
  j["rho"] = pair.rho;
  j["residual"] = pair.residual;
  j["weak_form_residual"] = pair.weak_form_residual;
  j["objective"] = pair.objective;
  j["iterations"] = pair.iterations;
  j["converged"] = pair.converged;
  j["trivial"] = pair.trivial;
  j["heuristic"] = pair.heuristic;
  j["u"] = std::vector<double>(pair.u.data(), pair.u.data() + pair.u.size());
  return j;
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::eig1: return "eig1";
    case Mode::fixed_lambda: return "fixed-lambda";
    case Mode::fixed_rho: return "fixed-rho";
    case Mode::nehari: return "nehari";
    case Mode::branch_zero: return "branch-zero";
    case Mode::branch_infinity: return "branch-infinity";
    case Mode::verify: return "verify";
    case Mode::probe: return "probe";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::eig1, Mode::fixed_lambda, Mode::fixed_rho, Mode::nehari, Mode::branch_zero,
                 Mode::branch_infinity, Mode::verify, Mode::probe}) {
    if (text == to_string(m)) return m;
  }
  if (text == "fixed-lambda-coercive") return Mode::fixed_lambda;
  throw Error(ErrorCode::malformed_config, "key 'mode': unknown mode '" + text + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const KeySpec& s : key_specs()) out.emplace_back(s.name);
    return out;
  }();
  return keys;
}

std::string help_text() {
  std::ostringstream os;
  os << "usage: fracpq [mode] [--key value ...] [--config file]\n\n"
        "Every key may also be set in a flat 'key = value' config file; flags win over the file.\n\n";
  for (const KeySpec& s : key_specs()) {
    char line[160];
    std::snprintf(line, sizeof line, "  --%-16s %s", s.name, s.help);
    os << line;
    if (*s.default_value) os << " [default: " << s.default_value << "]";
    os << "\n";
  }
  os << "\nexit codes: 0 ok, 1 no convergence or infeasible lambda, 2 configuration or io error, 3 verification failed\n";
  return os.str();
}

RunConfig parse_config(const std::vector<std::string>& args, const std::map<std::string, std::string>& env) {
  CLI::App app{"fracpq"};
  app.set_help_flag();
  app.allow_extras(false);
  std::string positional_mode;
  std::string config_file;
  app.add_option("mode_positional", positional_mode);
  app.add_option("--config", config_file);
  std::map<std::string, std::string> flag_text;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const KeySpec& s : key_specs()) {
    const std::string key = s.name;
    if (key == "timings") continue;
    flag_opts[key] = app.add_option("--" + key, flag_text[key]);
  }
  bool timings_flag = false;
  CLI::Option* timings_opt = app.add_flag("--timings", timings_flag);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::malformed_config, std::string("command line: ") + e.what());
  }

  RunConfig c;
  auto set = [&](const std::string& key, const std::string& value, const std::string& source) {
    apply(c, key, value);
    c.values[key] = value;
    c.provenance[key] = source;
  };
  for (const KeySpec& s : key_specs()) set(s.name, s.default_value, "default");
  if (auto it = env.find("FRACPQ_OUTPUT_DIR"); it != env.end() && !it->second.empty()) {
    set("output-dir", it->second, "env");
  }
  if (!config_file.empty()) {
    const KeyValueFile file = KeyValueFile::load(config_file);
    const std::vector<std::string> unknown = file.unknown_keys(config_keys());
    if (!unknown.empty()) {
      throw Error(ErrorCode::malformed_config, "unknown key '" + unknown.front() + "' in " + config_file);
    }
    for (const auto& [key, entry] : file.entries()) set(key, entry.value, "file:" + config_file);
  }
  if (!positional_mode.empty()) set("mode", positional_mode, "flag");
  for (const auto& [key, opt] : flag_opts) {
    if (opt->count() > 0) set(key, flag_text[key], "flag");
  }
  if (timings_opt->count() > 0) set("timings", "true", "flag");
  if (!positional_mode.empty() && flag_opts["mode"]->count() > 0 && flag_text["mode"] != positional_mode) {
    throw Error(ErrorCode::malformed_config, "key 'mode': positional and --mode disagree");
  }
  validate(c);
  return c;
}

std::string RunConfig::command() const {
  std::ostringstream os;
  os << "fracpq " << to_string(mode);
  for (const std::string& key : config_keys()) {
    if (key == "mode" || key == "timings") continue;
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty()) continue;
    os << " --" << key << " " << it->second;
  }
  if (timings) os << " --timings";
  return os.str();
}

std::string RunConfig::output_path(const std::string& extension) const {
  if (!output.empty()) {
    if (extension.empty()) return output;
    const auto dot = output.find_last_of('.');
    const auto slash = output.find_last_of('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? output.substr(0, dot) : output) + extension;
  }
  const std::string dir = output_dir.empty() ? "." : output_dir;
  return dir + "/" + to_string(mode) + extension;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorCode::io_failure, "write to '" + path + "' failed");
}

std::string branch_csv(const Branch& branch, const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& line : comments) out += "# " + line + "\n";
  out += "rho,lambda,seminorm_p,norm_s2q,residual,converged\n";
  for (const BranchPoint& pt : branch) {
    out += csv_number(pt.rho) + "," + csv_number(pt.lambda) + "," + csv_number(pt.seminorm_p) + "," +
           csv_number(pt.norm_s2q) + "," + csv_number(pt.residual) + "," + (pt.converged ? "true" : "false") + "\n";
  }
  return out;
}

void emit_branch_csv(const Branch& branch, const std::string& path, const std::vector<std::string>& comments) {
  write_file(path, branch_csv(branch, comments));
}

nlohmann::json eigenpair_json(const EigenPair& pair, const RunConfig& config) {
  nlohmann::json j = header_json(config);
  j["pair"] = pair_body(pair);
  return j;
}

void emit_eigenpair_json(const EigenPair& pair, const RunConfig& config, const std::string& path) {
  write_file(path, eigenpair_json(pair, config).dump(2) + "\n");
}

void emit_eigenpairs_json(const std::vector<EigenPair>& pairs, const RunConfig& config, const std::string& path,
                          const std::vector<std::string>& notes) {
  nlohmann::json j = header_json(config);
  j["pairs"] = nlohmann::json::array();
  for (const EigenPair& pair : pairs) j["pairs"].push_back(pair_body(pair));
  j["notes"] = notes;
  write_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_config, "'" + path + "': " + e.what());
  }
}

double recompute_residual(const nlohmann::json& doc) {
  try {
    const auto& g = doc.at("grid");
    const Grid grid = build_grid(g.at("a").get<double>(), g.at("b").get<double>(), g.at("n").get<int>());
    const auto& pj = doc.at("params");
    SpectralParams sp{pj.at("s1").get<double>(), pj.at("s2").get<double>(), pj.at("p").get<double>(),
                      pj.at("q").get<double>(), std::nullopt, std::nullopt};
    const auto& pair = doc.at("pair");
    const std::vector<double> values = pair.at("u").get<std::vector<double>>();
    const Field u = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    const double lambda = pair.at("lambda").get<double>();
    const Mode mode = parse_mode(doc.at("mode").get<std::string>());
    const NonlocalKernel kq = build_kernel(grid, sp.s2, sp.q);
    if (mode == Mode::eig1) return weak_form_residual_q(u, lambda, kq);
    const NonlocalKernel kp = build_kernel(grid, sp.s1, sp.p);
    return weak_form_residual(u, lambda, kp, kq);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_config, std::string("eigenpair document: ") + e.what());
  }
}

std::string report_text(const VerificationReport& report, bool timings) {
  std::ostringstream os;
  os << "verification report\n";
  os << "seed: " << report.seed << "\n";
  os << "grids: " << report.grid_summary << "\n";
  for (const std::string& w : report.warnings) os << "warning: " << w << "\n";
  os << "\n";
  for (const CheckResult& c : report.checks) {
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "\n";
    for (const auto& [k, v] : c.parameters) os << "    param     " << k << " = " << v << "\n";
    for (const auto& [k, v] : c.measured) os << "    measured  " << k << " = " << csv_number(v) << "\n";
    for (const auto& [k, v] : c.thresholds) os << "    threshold " << k << " = " << csv_number(v) << "\n";
    if (!c.note.empty()) os << "    note      " << c.note << "\n";
    if (timings) os << "    runtime_s " << csv_number(c.runtime_seconds) << "\n";
  }
  const auto failed = std::count_if(report.checks.begin(), report.checks.end(), [](const auto& c) { return !c.pass; });
  os << "\noverall: " << (report.overall_pass ? "PASS" : "FAIL") << " (" << report.checks.size() - failed << "/"
     << report.checks.size() << " checks passed)\n";
  return os.str();
}

nlohmann::json report_json(const VerificationReport& report, bool timings) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["grid_summary"] = report.grid_summary;
  j["warnings"] = report.warnings;
  j["overall_pass"] = report.overall_pass;
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["pass"] = c.pass;
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [k, v] : c.parameters) params.push_back({k, v});
    nlohmann::json measured = nlohmann::json::array();
    for (const auto& [k, v] : c.measured) measured.push_back({k, v});
    nlohmann::json thresholds = nlohmann::json::array();
    for (const auto& [k, v] : c.thresholds) thresholds.push_back({k, v});
    cj["parameters"] = params;
    cj["measured"] = measured;
    cj["thresholds"] = thresholds;
    cj["note"] = c.note;
    if (timings) cj["runtime_seconds"] = c.runtime_seconds;
    j["checks"].push_back(cj);
  }
  return j;
}

void emit_report(const VerificationReport& report, const std::string& text_path, const std::string& json_path,
                 bool timings) {
  write_file(text_path, report_text(report, timings));
  write_file(json_path, report_json(report, timings).dump(2) + "\n");
}

}  // namespace fracpq
