#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgm/bench.hpp"

namespace {

// Exit codes: 0 success, 1 solver pathology / failed criteria, 2 bad
// configuration or unusable output directory.
constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kConfigError = 2;

std::string default_out_dir() {
  if (const char* env = std::getenv("SGM_BENCH_OUT")) return env;
  return "sgm-bench-out";
}

// Everything the flags can set, shared by both subcommands.
struct CliOptions {
  sgm::bench::ExperimentConfig cfg;
  std::string out_dir = default_out_dir();
  std::vector<std::string> formats;
  bool no_diagnostics = false;
  std::string export_path;
  unsigned long long n = 0;
  long long max_iters = 0;
  double stop_dnorm = 0.0;
  double delta1 = 1e-3;
  double delta2 = 1e-4;
  double beta = 0.5;
};

void add_options(CLI::App* cmd, CliOptions& o, bool require_experiment) {
  auto* exp = cmd->add_option("--experiment", o.cfg.experiment,
                              "experiment to run: ex1, ex2 or ex3")
                  ->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
  if (require_experiment) exp->required();
  cmd->add_option("--method", o.cfg.method, "SGM, YWH, ZH or all")
      ->check(CLI::IsMember({"SGM", "YWH", "ZH", "all", "sgm", "ywh", "zh"}));
  cmd->add_option("--n", o.n, "problem dimension (ex2/ex3)");
  cmd->add_option("--seed", o.cfg.seed, "generator seed (ex2)");
  cmd->add_option("--max-iters", o.max_iters, "iteration cap");
  cmd->add_option("--stop-ferr", o.cfg.ferr_threshold,
                  "table threshold on |f - f*|");
  cmd->add_option("--stop-grad", o.cfg.grad_threshold,
                  "table threshold on the gradient norm");
  cmd->add_option("--stop-dnorm", o.stop_dnorm,
                  "solver stop tolerance on ||d_k|| (scaled by 1 + ||x||)");
  cmd->add_option("--scaling", o.cfg.scaling,
                  "identity, hessian, hessian-direct, hessian-clipped or 2V")
      ->check(CLI::IsMember(
          {"default", "identity", "hessian", "hessian-direct", "hessian-clipped", "2V"}));
  cmd->add_option("--delta1", o.delta1, "line-search parameter delta1");
  cmd->add_option("--delta2", o.delta2, "line-search parameter delta2");
  cmd->add_option("--beta", o.beta, "backtracking factor beta");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--format", o.formats, "trace formats: csv and/or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--no-diagnostics", o.no_diagnostics,
                "skip the per-run diagnostics report");
  cmd->add_option("--export-problem", o.export_path,
                  "also write the problem data as JSON to this path");
  cmd->set_config("--config", "", "flat key=value config file; flags win");
  cmd->allow_config_extras(false);
}

void finalize(CliOptions& o) {
  o.cfg.out_dir = o.out_dir;
  if (!o.formats.empty()) {
    o.cfg.write_csv = false;
    o.cfg.write_json = false;
    for (const auto& f : o.formats) {
      if (f == "csv") o.cfg.write_csv = true;
      if (f == "json") o.cfg.write_json = true;
    }
  }
  o.cfg.diagnostics = !o.no_diagnostics;
  if (!o.export_path.empty()) o.cfg.export_problem = o.export_path;
  if (o.n > 0) o.cfg.n = static_cast<std::size_t>(o.n);
  if (o.max_iters > 0) o.cfg.max_iters = static_cast<int>(o.max_iters);
  if (o.stop_dnorm > 0.0) o.cfg.stop_dnorm = o.stop_dnorm;
  o.cfg.line_search_overrides = {o.delta1, o.delta2, o.beta};
  // Rejects corrupt parameter combinations (delta1 >= beta etc.) before
  // anything runs.
  sgm::SgmParams params;
  params.delta1 = o.delta1;
  params.delta2 = o.delta2;
  params.beta = o.beta;
  params.validate();
}

void check_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = dir / ".write_probe";
  std::ofstream f(probe);
  if (!f || !(f << "ok"))
    throw sgm::ArgumentError("output directory not writable: " + dir.string());
  f.close();
  std::filesystem::remove(probe, ec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Constrained-optimization benchmark harness: scaled gradient method "
      "with a modified non-monotone line search, plus baselines"};
  app.require_subcommand(1);

  CliOptions run_opts;
  auto* run_cmd =
      app.add_subcommand("run", "run an experiment and write traces/tables");
  add_options(run_cmd, run_opts, /*require_experiment=*/true);

  CliOptions verify_opts;
  auto* verify_cmd = app.add_subcommand(
      "verify", "run the full acceptance suite (pass/fail per criterion)");
  add_options(verify_cmd, verify_opts, /*require_experiment=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kConfigError;
  }

  try {
    if (run_cmd->parsed()) {
      finalize(run_opts);
      const auto result = sgm::bench::run_experiment(run_opts.cfg, std::cout);
      sgm::bench::write_outputs(run_opts.cfg, result, std::cout);
      for (const auto& mr : result.runs) {
        if (mr.report.status == sgm::Status::linesearch_failure ||
            mr.report.status == sgm::Status::numerical_error) {
          std::cerr << "solver pathology (" << sgm::to_string(mr.method)
                    << "): " << mr.report.error_message << "\n";
          return kSolverFailure;
        }
      }
      return kOk;
    }

    finalize(verify_opts);
    check_out_dir(verify_opts.cfg.out_dir);
    const auto results =
        sgm::bench::run_acceptance(verify_opts.cfg.out_dir, std::cout);
    bool all_pass = true;
    for (const auto& r : results) {
      std::cout << "[" << (r.id < 10 ? " " : "") << r.id << "] "
                << (r.pass ? "PASS" : "FAIL") << "  " << r.name << " -- "
                << r.detail << "\n";
      all_pass = all_pass && r.pass;
    }
    return all_pass ? kOk : kSolverFailure;
  } catch (const sgm::ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}
