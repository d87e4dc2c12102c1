#include "sgm/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace sgm {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string trace_to_csv(const RunReport& report) {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const auto& r : report.trace) {
    out += std::to_string(r.k);
    out += ',';
    out += format_double(r.f_val);
    out += ',';
    out += format_double(r.grad_norm);
    out += ',';
    out += format_double(r.d_norm);
    out += ',';
    out += format_double(r.lambda);
    out += ',';
    out += std::to_string(r.j);
    out += ',';
    out += format_double(r.T);
    out += ',';
    out += format_double(r.s);
    out += ',';
    out += format_double(r.grad_dot_d);
    out += ',';
    out += std::to_string(r.f_evals);
    out += ',';
    out += std::to_string(r.wall_nanos);
    out += '\n';
  }
  return out;
}

nlohmann::json trace_to_json(const RunReport& report,
                             const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["config"] = config_echo;
  j["method"] = to_string(report.method);
  j["status"] = to_string(report.status);
  j["total_f_evals"] = report.total_f_evals;
  j["total_grad_evals"] = report.total_grad_evals;
  j["x0_projected"] = report.x0_projected;
  j["scaling_fallbacks"] = report.scaling_fallbacks;
  j["mu_eff_max"] = report.mu_eff_max;
  if (!report.error_message.empty()) j["error"] = report.error_message;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : report.trace) {
    recs.push_back({{"k", r.k},
                    {"f", r.f_val},
                    {"grad_norm", r.grad_norm},
                    {"d_norm", r.d_norm},
                    {"lambda", r.lambda},
                    {"j", r.j},
                    {"T", r.T},
                    {"s", r.s},
                    {"grad_dot_d", r.grad_dot_d},
                    {"f_evals", r.f_evals},
                    {"wall_nanos", r.wall_nanos}});
  }
  j["records"] = std::move(recs);
  return j;
}

std::string strip_wall_column(const std::string& csv) {
  std::string out;
  out.reserve(csv.size());
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out += (pos == std::string::npos) ? line : line.substr(0, pos);
    out += '\n';
  }
  return out;
}

MethodSummary summarize(const RunReport& report, std::optional<double> f_star,
                        double ferr_threshold, double grad_threshold) {
  MethodSummary s;
  s.method = to_string(report.method);
  s.status = to_string(report.status);
  s.f_evals = report.total_f_evals;
  s.grad_evals = report.total_grad_evals;
  long long nanos = 0;
  for (const auto& r : report.trace) nanos += r.wall_nanos;
  s.wall_seconds = static_cast<double>(nanos) * 1e-9;
  for (const auto& r : report.trace) {
    if (f_star && !s.iters_to_ferr &&
        std::abs(r.f_val - *f_star) <= ferr_threshold)
      s.iters_to_ferr = r.k;
    if (!s.iters_to_grad && r.grad_norm <= grad_threshold)
      s.iters_to_grad = r.k;
  }
  if (!report.trace.empty()) {
    if (f_star) s.final_ferr = std::abs(report.trace.back().f_val - *f_star);
    s.final_grad = report.trace.back().grad_norm;
  }
  return s;
}

namespace {

std::string cell_int(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

std::string cell_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("-");
}

}  // namespace

std::string comparison_table_csv(const std::vector<MethodSummary>& rows,
                                 double ferr_threshold, double grad_threshold,
                                 std::optional<double> f_star) {
  std::string out = "# ferr_threshold=" + format_double(ferr_threshold) +
                    ",grad_threshold=" + format_double(grad_threshold) +
                    ",f_star=" + (f_star ? format_double(*f_star) : "none") +
                    "\n";
  out +=
      "method,iters_to_ferr,iters_to_grad,final_ferr,final_grad,f_evals,"
      "grad_evals,wall_seconds,status\n";
  for (const auto& r : rows) {
    out += r.method + ',' + cell_int(r.iters_to_ferr) + ',' +
           cell_int(r.iters_to_grad) + ',' + cell_double(r.final_ferr) + ',' +
           format_double(r.final_grad) + ',' + std::to_string(r.f_evals) +
           ',' + std::to_string(r.grad_evals) + ',' +
           format_double(r.wall_seconds) + ',' + r.status + '\n';
  }
  return out;
}

std::string comparison_table_text(const std::vector<MethodSummary>& rows,
                                  double ferr_threshold, double grad_threshold,
                                  std::optional<double> f_star) {
  std::ostringstream out;
  out << "thresholds: |f - f*| <= " << format_double(ferr_threshold)
      << ", ||grad|| <= " << format_double(grad_threshold)
      << ", f* = " << (f_star ? format_double(*f_star) : "n/a") << "\n";
  out << "method  it(ferr)  it(grad)  final_ferr    final_grad    f_evals  "
         "wall(s)  status\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-6s  %8s  %8s  %-12s  %-12s  %7lld  %7.3f  %s\n",
                  r.method.c_str(), cell_int(r.iters_to_ferr).c_str(),
                  cell_int(r.iters_to_grad).c_str(),
                  cell_double(r.final_ferr).c_str(),
                  format_double(r.final_grad).c_str(), r.f_evals,
                  r.wall_seconds, r.status.c_str());
    out << line;
  }
  return out.str();
}

std::string plot_series_csv(const RunReport& report,
                            std::optional<double> f_star) {
  std::string out;
  if (f_star) {
    out = "k,f_err,grad_norm\n";
    for (const auto& r : report.trace) {
      out += std::to_string(r.k) + ',' + format_double(r.f_val - *f_star) +
             ',' + format_double(r.grad_norm) + '\n';
    }
  } else {
    out = "# f_star unavailable; f_err column omitted\nk,grad_norm\n";
    for (const auto& r : report.trace)
      out += std::to_string(r.k) + ',' + format_double(r.grad_norm) + '\n';
  }
  return out;
}

nlohmann::json violations_json(const std::vector<Violation>& violations) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : violations)
    arr.push_back(
        {{"check", v.check}, {"k", v.k}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  return arr;
}

}  // namespace sgm
