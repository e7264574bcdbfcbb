#include "qvigame/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qvigame {

namespace {

using nlohmann::json;

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

void write_header(std::ostream& out, std::size_t dim) {
  out << 't';
  for (std::size_t i = 1; i <= dim; ++i) out << ",x" << i;
}

void write_row_prefix(std::ostream& out, double t, const Vector& x) {
  out << format_double(t);
  for (double xi : x) out << ',' << format_double(xi);
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto comma = line.find(',', pos);
    const std::string token = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
      throw std::runtime_error("value CSV: cannot parse `" + token + "`");
    }
    fields.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return fields;
}

json checks_json(const ValidationReport& report) {
  json arr = json::array();
  for (const auto& c : report.checks) {
    json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["margin"] = number(c.margin);
    j["detail"] = c.detail;
    if (c.witness) {
      json w;
      w["t"] = number(c.witness->t);
      w["x"] = vector_json(c.witness->x);
      json acts = json::array();
      for (const auto& a : c.witness->actions) acts.push_back(vector_json(a));
      w["actions"] = acts;
      j["witness"] = w;
    } else {
      j["witness"] = nullptr;
    }
    arr.push_back(j);
  }
  return arr;
}

json dpp_json(const DppReport& dpp, double allowance) {
  json j;
  j["s"] = number(dpp.s);
  j["slice"] = dpp.slice;
  j["mean"] = number(dpp.mean);
  j["value_start"] = number(dpp.value_start);
  j["residual"] = number(dpp.residual);
  j["stderr"] = number(dpp.standard_error);
  const double threshold = 3.0 * dpp.standard_error + allowance;
  j["threshold"] = number(threshold);
  j["pass"] = std::abs(dpp.residual) <= threshold;
  return j;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_value_csv(std::ostream& out, const SolveResult& result, const Grid& grid) {
  write_header(out, grid.dim());
  out << ",V\n";
  Vector x;
  for (const auto& slice : result.stack) {
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
      grid.point(p, x);
      write_row_prefix(out, slice.t, x);
      out << ',' << format_double(slice.values[p]) << '\n';
    }
  }
}

SolveResult read_value_csv(std::istream& in, const Grid& grid) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("value CSV: empty file");
  const std::size_t width = grid.dim() + 2;
  SolveResult result;
  result.stack.resize(grid.time_steps() + 1);
  std::size_t row = 0;
  const std::size_t expected = (grid.time_steps() + 1) * grid.node_count();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = parse_row(line);
    if (fields.size() != width) throw std::runtime_error("value CSV: wrong column count");
    if (row >= expected) throw std::runtime_error("value CSV: too many rows");
    const std::size_t n = row / grid.node_count();
    auto& slice = result.stack[n];
    if (slice.values.empty()) {
      slice.t = fields.front();
      slice.values.reserve(grid.node_count());
    }
    slice.values.push_back(fields.back());
    ++row;
  }
  if (row != expected) throw std::runtime_error("value CSV: row count does not match the grid");
  result.iterations.assign(grid.time_steps() + 1, 0);
  return result;
}

void write_policy_csv(std::ostream& out, const PolicyMap& policy, const ProblemSpec& spec,
                      const Grid& grid) {
  write_header(out, grid.dim());
  out << ",regime";
  for (std::size_t i = 1; i <= grid.dim(); ++i) out << ",a" << i;
  out << '\n';
  Vector x;
  const Vector zero(grid.dim(), 0.0);
  for (std::size_t n = 0; n < policy.slices(); ++n) {
    for (std::size_t p = 0; p < policy.nodes(); ++p) {
      grid.point(p, x);
      write_row_prefix(out, grid.time(n), x);
      const Regime r = policy.regime(n, p);
      out << ',' << static_cast<int>(r);
      const Vector* a = &zero;
      const int idx = policy.action(n, p);
      if (r == Regime::ImpulseI) a = &spec.actions_I.actions[static_cast<std::size_t>(idx)];
      if (r == Regime::ImpulseII) a = &spec.actions_II.actions[static_cast<std::size_t>(idx)];
      for (double ai : *a) out << ',' << format_double(ai);
      out << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const SimReport& report, std::size_t dim) {
  out << "path,t";
  for (std::size_t i = 1; i <= dim; ++i) out << ",x" << i;
  out << ",regime,action\n";
  for (const auto& row : report.traces) {
    out << row.path << ',' << format_double(row.t);
    for (double xi : row.state) out << ',' << format_double(xi);
    out << ',' << static_cast<int>(row.regime) << ',' << row.action << '\n';
  }
}

std::string validation_json(const ValidationReport& report) {
  json j;
  j["overall"] = report.overall;
  j["checks"] = checks_json(report);
  return j.dump(2);
}

std::string solve_summary_json(const SolveResult& result, const Grid& grid) {
  json j;
  j["time_steps"] = grid.time_steps();
  j["dt"] = number(grid.dt());
  j["nodes"] = grid.node_count();
  j["iterations"] = result.iterations;
  json res = json::array();
  for (double r : result.residuals) res.push_back(number(r));
  j["residuals"] = res;
  double max_res = 0.0;
  for (std::size_t n = 0; n + 1 < result.residuals.size(); ++n) {
    max_res = std::max(max_res, result.residuals[n]);
  }
  j["max_residual"] = number(max_res);
  int max_iter = 0;
  for (int it : result.iterations) max_iter = std::max(max_iter, it);
  j["max_iterations"] = max_iter;
  j["clamp_events"] = result.clamp_events;
  j["off_domain_action_pairs"] = grid.off_domain_pairs();
  return j.dump(2);
}

std::string sim_report_json(const SimReport& report, double value_start, double allowance,
                            const std::optional<DppReport>& dpp) {
  json j;
  j["paths"] = report.paths;
  j["seed"] = report.seed;
  j["substeps"] = report.substeps;
  j["t0"] = number(report.t0);
  j["start_slice"] = report.start_slice;
  j["x0"] = vector_json(report.x0);
  j["J_mean"] = number(report.J_mean);
  j["J_stderr"] = number(report.J_stderr);
  j["breakdown"] = {{"running", number(report.breakdown.running)},
                    {"costs_I", number(report.breakdown.costs_I)},
                    {"costs_II", number(report.breakdown.costs_II)},
                    {"terminal", number(report.breakdown.terminal)}};
  j["histogram_I"] = report.histogram_I;
  j["histogram_II"] = report.histogram_II;
  j["tail_total"] = report.tail_total;
  j["escapes"] = report.escapes;
  const double diff = std::abs(report.J_mean - value_start);
  const double threshold = 3.0 * report.J_stderr + allowance;
  j["value_start"] = number(value_start);
  j["consistency"] = {{"difference", number(diff)},
                      {"threshold", number(threshold)},
                      {"pass", diff <= threshold}};
  if (dpp) j["dpp"] = dpp_json(*dpp, allowance);
  return j.dump(2);
}

std::string dpp_report_json(const DppReport& dpp, double allowance) {
  return dpp_json(dpp, allowance).dump(2);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("sha256: cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xF]);
  }
  return hex;
}

}  // namespace qvigame
