#include "rrdc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrdc/analysis.hpp"
#include "rrdc/problems.hpp"

namespace rrdc::cli {

namespace fs = std::filesystem;

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  const auto to_int = [&text](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad level list '" + text + "'");
    }
    if (used != s.size()) throw std::invalid_argument("bad level list '" + text + "'");
    return v;
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots)), hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty level range '" + text + "'");
    for (int k = lo; k <= hi; ++k) levels.push_back(k);
    return levels;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) levels.push_back(to_int(item));
  return levels;
}

namespace {

ProblemSpec configured_problem(const RunConfig& c) {
  ProblemSpec p = problem_by_label(c.problem);
  if (c.alpha) p.alpha = *c.alpha;
  return p;
}

void validate_common(const RunConfig& c) {
  const ProblemSpec p = configured_problem(c);
  if (c.alpha && !(*c.alpha > 0.0)) throw std::invalid_argument("--alpha must be positive");
  if (c.threads < 1) throw std::invalid_argument("--threads must be at least 1");
  if (is_modified(c.scheme)) {
    if (p.bc != BoundaryKind::DirichletSides) {
      throw std::invalid_argument("modified schemes need a problem with Dirichlet sides");
    }
    if (p.nu_f != p.nu_s) throw std::invalid_argument("modified schemes need equal diffusivities");
  }
}

void write_file(const RunConfig& c, const std::string& name, const std::string& content) {
  if (c.out_dir.empty()) return;
  fs::create_directories(c.out_dir);
  std::ofstream f(fs::path(c.out_dir) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out_dir) / name).string());
  f << content;
}

std::string stem(const RunConfig& c) { return c.problem + "_" + to_string(c.scheme); }

}  // namespace

void validate_for_run(const RunConfig& c) {
  validate_common(c);
  if (!c.dt) throw std::invalid_argument("run needs --dt");
  const ProblemSpec p = configured_problem(c);
  step_count(p.final_time, *c.dt);
  if (std::lround(1.0 / *c.dt) < 2) throw std::invalid_argument("--dt too large for a mesh with h = dt");
  if (!c.format.empty() && c.format != "json") throw std::invalid_argument("run writes json only");
}

void validate_for_study(const RunConfig& c) {
  validate_common(c);
  if (c.levels.size() < 2) throw std::invalid_argument("--levels needs at least two levels");
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    if (c.levels[i] < 2 || c.levels[i] > 14) throw std::invalid_argument("levels must lie in 2..14");
    if (i && c.levels[i] <= c.levels[i - 1]) throw std::invalid_argument("levels must be strictly ascending");
  }
  if (!c.format.empty() && c.format != "csv" && c.format != "md" && c.format != "json") {
    throw std::invalid_argument("--format must be csv, md or json");
  }
}

int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate_for_run(c);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  try {
    const ProblemSpec p = configured_problem(c);
    TrajectoryOptions opts;
    std::ostringstream dump;
    if (c.dump_states) opts.dump = &dump;
    const Trajectory traj = run_trajectory(c.scheme, p, *c.dt, opts);
    const ErrorRecord rec = error_norms(traj, p);
    const std::string json = to_json(rec);
    out << json << '\n';
    write_file(c, stem(c) + ".json", json + "\n");
    if (c.dump_states) {
      if (c.out_dir.empty()) {
        err << dump.str();
      } else {
        write_file(c, stem(c) + "_states.csv", dump.str());
      }
    }
    for (double v : {rec.e_u1, rec.e_w1, rec.e_du1, rec.e_lambda, rec.e_1lambda}) {
      if (!std::isfinite(v)) {
        err << "error: non-finite error norm\n";
        return kNumericalFailure;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

int cmd_convergence(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate_for_study(c);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  try {
    const ProblemSpec p = configured_problem(c);
    StudyOptions opts;
    opts.threads = c.threads;
    const ConvergenceReport report = convergence_study(p, c.scheme, c.levels, opts);
    const std::string csv = to_csv(report), md = to_markdown(report);
    const std::string fmt = c.format.empty() ? "md" : c.format;
    if (fmt == "csv") {
      out << csv;
    } else if (fmt == "md") {
      out << md;
    } else {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& l : report.levels) {
        nlohmann::json row = l.errors ? nlohmann::json::parse(to_json(*l.errors)) : nlohmann::json::object();
        row["level"] = l.level;
        if (!l.failure.empty()) row["failure"] = l.failure;
        j.push_back(row);
      }
      out << j.dump(2) << '\n';
    }
    write_file(c, stem(c) + "_convergence.csv", csv);
    write_file(c, stem(c) + "_convergence.md", md);
    for (const auto& [ok, line] : check_rules(report, default_rate_rules(c.problem, c.scheme))) {
      out << line << '\n';
    }
    if (!report.complete()) {
      err << "error: at least one level failed\n";
      return kNumericalFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

int cmd_diagnose(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate_for_study(c);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  try {
    const ProblemSpec p = configured_problem(c);
    StudyOptions opts;
    opts.threads = c.threads;
    opts.diagnostics = true;
    const ConvergenceReport report = convergence_study(p, c.scheme, c.levels, opts);
    const std::string csv = diagnostics_csv(report);
    out << csv;
    write_file(c, stem(c) + "_diagnostics.csv", csv);
    if (!report.complete()) {
      err << "error: at least one level failed\n";
      return kNumericalFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

// Argument parsing ---------------------------------------------------------------------

namespace {

struct Flags {
  std::string problem, scheme, levels, out_dir, format, config;
  double dt = 0.0, alpha = 0.0;
  int threads = 1;
  bool dump_states = false;
  std::vector<CLI::Option*> options;
};

void add_flags(CLI::App& cmd, Flags& f) {
  f.options = {
      cmd.add_option("--problem", f.problem, "neumann-slanted | two-viscosity | dirichlet-slanted | zero"),
      cmd.add_option("--scheme", f.scheme,
                     "prediction | correction | modified-prediction | modified-correction | monolithic"),
      cmd.add_option("--dt", f.dt, "time step (mesh size h = dt)"),
      cmd.add_option("--levels", f.levels, "refinement levels k0..k1 with dt = h = 2^-k"),
      cmd.add_option("--alpha", f.alpha, "Robin parameter override"),
      cmd.add_option("--out-dir", f.out_dir, "directory for report files"),
      cmd.add_option("--format", f.format, "csv | md | json"),
      cmd.add_option("--threads", f.threads, "worker threads for refinement levels"),
      cmd.add_flag("--dump-states", f.dump_states, "write per-step norms"),
      cmd.add_option("--config", f.config, "JSON file with the same keys; flags win"),
  };
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  const auto given = [&f](const char* name) {
    for (auto* o : f.options) {
      if (o->get_name() == name) return o->count() > 0;
    }
    return false;
  };
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::invalid_argument("cannot open config file " + f.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("bad config file: ") + e.what());
    }
    try {
      if (j.contains("problem")) c.problem = j["problem"].get<std::string>();
      if (j.contains("scheme")) c.scheme = scheme_from_string(j["scheme"].get<std::string>());
      if (j.contains("dt")) c.dt = j["dt"].get<double>();
      if (j.contains("levels")) {
        c.levels = j["levels"].is_string() ? parse_levels(j["levels"].get<std::string>())
                                           : j["levels"].get<std::vector<int>>();
      }
      if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
      if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
      if (j.contains("format")) c.format = j["format"].get<std::string>();
      if (j.contains("threads")) c.threads = j["threads"].get<int>();
      if (j.contains("dump_states")) c.dump_states = j["dump_states"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("bad config value: ") + e.what());
    }
  }
  if (given("--problem")) c.problem = f.problem;
  if (given("--scheme")) c.scheme = scheme_from_string(f.scheme);
  if (given("--dt")) c.dt = f.dt;
  if (given("--levels")) c.levels = parse_levels(f.levels);
  if (given("--alpha")) c.alpha = f.alpha;
  if (given("--out-dir")) c.out_dir = f.out_dir;
  if (given("--format")) c.format = f.format;
  if (given("--threads")) c.threads = f.threads;
  if (given("--dump-states")) c.dump_states = f.dump_states;
  problem_by_label(c.problem);  // reject unknown labels early
  return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robin-Robin prediction-correction solver for parabolic-parabolic interface problems"};
  app.require_subcommand(1);
  Flags run_flags, conv_flags, diag_flags;
  CLI::App* run = app.add_subcommand("run", "single simulation; prints final-time errors as JSON");
  CLI::App* conv = app.add_subcommand("convergence", "convergence study over refinement levels");
  CLI::App* diag = app.add_subcommand("diagnose", "prediction-step time-difference diagnostics");
  add_flags(*run, run_flags);
  add_flags(*conv, conv_flags);
  add_flags(*diag, diag_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (run->parsed()) return cmd_run(resolve(run_flags), out, err);
    if (conv->parsed()) return cmd_convergence(resolve(conv_flags), out, err);
    if (diag->parsed()) return cmd_diagnose(resolve(diag_flags), out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace rrdc::cli
