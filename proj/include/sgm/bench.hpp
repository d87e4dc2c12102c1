#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "sgm/problems.hpp"
#include "sgm/trace_io.hpp"

namespace sgm::bench {

struct ExperimentConfig {
  std::string experiment;    // ex1 | ex2 | ex3
  std::string method = "all";  // SGM | YWH | ZH | all
  std::optional<std::size_t> n;
  std::uint64_t seed = 20240613;  // pinned default for ex2
  std::optional<int> max_iters;
  double ferr_threshold = 5e-7;  // table column: |f - f*| threshold
  double grad_threshold = 1e-4;  // table column: ||grad|| threshold
  std::optional<double> stop_dnorm;
  struct LineSearchOverrides {
    double delta1 = 1e-3;
    double delta2 = 1e-4;
    double beta = 0.5;
  };
  std::optional<LineSearchOverrides> line_search_overrides;
  std::string scaling = "default";  // identity|hessian|hessian-clipped|2V
  std::filesystem::path out_dir;
  bool write_csv = true;
  bool write_json = false;
  bool diagnostics = true;
  std::optional<std::filesystem::path> export_problem;
};

struct MethodRun {
  Method method = Method::SGM;
  RunReport report;
  std::vector<Violation> violations;
  bool error_estimate_applicable = false;
  std::size_t error_estimate_violations = 0;
  double L_used = 0.0;
  double zeta_used = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::size_t n = 0;
  std::optional<double> f_star;
  std::string f_star_source;
  std::vector<MethodRun> runs;
  std::vector<MethodSummary> summaries;
  std::size_t total_violations = 0;
};

// Builds the experiment, runs the requested methods, computes the
// reference optimum and (optionally) the diagnostics.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Writes traces, plot series, diagnostics and the comparison table into
// cfg.out_dir. Throws ArgumentError when the directory is unusable.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                   std::ostream& log);

// Reference optima. ex1 and ex3 use the self-contained oracles; ex2 uses
// a long-horizon continuation run polished by Euclidean projected
// gradient (the instance is seeded, so the value is reproducible).
double ex1_reference_value();
double ex3_reference_value(const Ex3Problem& p);
double ex2_reference_value(const Ex2Problem& p);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// The full acceptance gate; writes scratch files (determinism check)
// under scratch_dir. One result per criterion, in order.
std::vector<CriterionResult> run_acceptance(
    const std::filesystem::path& scratch_dir, std::ostream& log);

// Dimension the ex2 acceptance run uses (512, or the documented fallback
// when the host cannot meet the runtime budget).
std::size_t acceptance_ex2_dimension();

}  // namespace sgm::bench
