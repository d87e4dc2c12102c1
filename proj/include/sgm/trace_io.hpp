#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgm/diagnostics.hpp"
#include "sgm/solver.hpp"

namespace sgm {

// Fixed trace schema. wall_nanos is last so determinism checks can strip
// the timing column textually.
inline constexpr const char* kTraceCsvHeader =
    "k,f,grad_norm,d_norm,lambda,j,T,s,grad_dot_d,f_evals,wall_nanos";

// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

std::string trace_to_csv(const RunReport& report);

// Mirrors the CSV fields record by record, plus the configuration echo,
// status and run totals.
nlohmann::json trace_to_json(const RunReport& report,
                             const nlohmann::json& config_echo);

// Strips the trailing wall_nanos column from every row of a trace CSV.
std::string strip_wall_column(const std::string& csv);

struct MethodSummary {
  std::string method;
  std::optional<int> iters_to_ferr;
  std::optional<int> iters_to_grad;
  std::optional<double> final_ferr;
  double final_grad = 0.0;
  long long f_evals = 0;
  long long grad_evals = 0;
  double wall_seconds = 0.0;
  std::string status;
};

MethodSummary summarize(const RunReport& report, std::optional<double> f_star,
                        double ferr_threshold, double grad_threshold);

std::string comparison_table_csv(const std::vector<MethodSummary>& rows,
                                 double ferr_threshold, double grad_threshold,
                                 std::optional<double> f_star);

std::string comparison_table_text(const std::vector<MethodSummary>& rows,
                                  double ferr_threshold, double grad_threshold,
                                  std::optional<double> f_star);

// Per-iteration (k, f_err, grad_norm) series for external plotting. The
// f_err column is omitted (with a header note) when f_star is absent.
std::string plot_series_csv(const RunReport& report,
                            std::optional<double> f_star);

nlohmann::json violations_json(const std::vector<Violation>& violations);

}  // namespace sgm
