#include "dkflab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"

namespace dkflab::metrics {

std::vector<MetricsRow> compute_metrics(const netsim::FilterRun& run) {
  std::vector<MetricsRow> rows;
  rows.reserve(run.estimates.size());
  for (std::size_t k = 0; k < run.estimates.size(); ++k) {
    const auto& est = run.estimates[k];
    const auto& cov = run.covariances[k];
    const Eigen::VectorXd& truth = run.truth[k];
    const auto N = static_cast<double>(est.size());
    MetricsRow r;
    r.k = static_cast<Index>(k);
    for (std::size_t i = 0; i < est.size(); ++i) {
      r.avg_err_norm += (est[i] - truth).norm();
      r.avg_cov_norm += matops::spectral_norm(cov[i]);
      for (std::size_t j = i + 1; j < est.size(); ++j)
        r.consensus_residual = std::max(r.consensus_residual, (est[i] - est[j]).norm());
    }
    r.avg_err_norm /= N;
    r.avg_cov_norm /= N;
    r.ckf_err_norm = (run.ckf[k].x_hat - truth).norm();
    r.ckf_cov_norm = matops::spectral_norm(run.ckf[k].P);
    r.scalars_sent = run.comm.scalars_at(r.k);
    rows.push_back(r);
  }
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    os << r.k << ',' << format_double(r.avg_err_norm) << ',' << format_double(r.avg_cov_norm) << ','
       << format_double(r.ckf_err_norm) << ',' << format_double(r.ckf_cov_norm) << ','
       << format_double(r.consensus_residual) << ',' << r.scalars_sent << '\n';
  }
}

namespace {

template <typename T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    std::ostringstream os;
    os << "metrics line " << line << ": cannot parse '" << s << "'";
    throw Error(Errc::io_error, os.str());
  }
  return v;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) throw Error(Errc::io_error, "metrics header missing");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 7) throw Error(Errc::io_error, "metrics line " + std::to_string(line_no) + " has wrong width");
    MetricsRow r;
    r.k = parse_field<Index>(cells[0], line_no);
    r.avg_err_norm = parse_field<double>(cells[1], line_no);
    r.avg_cov_norm = parse_field<double>(cells[2], line_no);
    r.ckf_err_norm = parse_field<double>(cells[3], line_no);
    r.ckf_cov_norm = parse_field<double>(cells[4], line_no);
    r.consensus_residual = parse_field<double>(cells[5], line_no);
    r.scalars_sent = parse_field<std::size_t>(cells[6], line_no);
    rows.push_back(r);
  }
  return rows;
}

void write_estimates_csv(std::ostream& os, const netsim::FilterRun& run) {
  if (run.truth.empty()) return;
  const Index n = run.truth.front().size();
  os << "k,node";
  for (Index j = 1; j <= n; ++j) os << ",xhat_" << j;
  for (Index j = 1; j <= n; ++j) os << ",x_" << j;
  os << '\n';
  for (std::size_t k = 0; k < run.estimates.size(); ++k) {
    for (std::size_t i = 0; i < run.estimates[k].size(); ++i) {
      os << k << ',' << i;
      for (Index j = 0; j < n; ++j) os << ',' << format_double(run.estimates[k][i][j]);
      for (Index j = 0; j < n; ++j) os << ',' << format_double(run.truth[k][j]);
      os << '\n';
    }
  }
}

void write_snapshot_csv(std::ostream& os, const netsim::FilterRun& run, Index k) {
  const auto kk = static_cast<std::size_t>(k);
  if (k < 0 || kk >= run.estimates.size()) throw Error(Errc::index_out_of_range, "snapshot step out of range");
  const Index n = run.truth[kk].size();
  os << "kind,node";
  for (Index j = 1; j <= n; ++j) os << ",x_" << j;
  os << '\n';
  for (std::size_t i = 0; i < run.estimates[kk].size(); ++i) {
    os << "estimate," << i;
    for (Index j = 0; j < n; ++j) os << ',' << format_double(run.estimates[kk][i][j]);
    os << '\n';
  }
  os << "truth,";
  for (Index j = 0; j < n; ++j) os << ',' << format_double(run.truth[kk][j]);
  os << '\n';
}

double time_average(const std::vector<MetricsRow>& rows, double MetricsRow::*field, Index k_from, Index k_to) {
  double sum = 0.0;
  Index count = 0;
  for (const auto& r : rows) {
    if (r.k < k_from || r.k > k_to) continue;
    sum += r.*field;
    ++count;
  }
  if (count == 0) throw Error(Errc::index_out_of_range, "empty averaging window");
  return sum / static_cast<double>(count);
}

}  // namespace dkflab::metrics
