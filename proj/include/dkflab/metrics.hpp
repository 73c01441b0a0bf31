#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dkflab/netsim.hpp"

namespace dkflab::metrics {

using Index = Eigen::Index;

/// Vector norms are Euclidean, matrix norms spectral.
struct MetricsRow {
  Index k = 0;
  double avg_err_norm = 0.0;
  double avg_cov_norm = 0.0;
  double ckf_err_norm = 0.0;
  double ckf_cov_norm = 0.0;
  double consensus_residual = 0.0;
  std::size_t scalars_sent = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "k,avg_err_norm,avg_cov_norm,ckf_err_norm,ckf_cov_norm,consensus_residual,scalars_sent";

/// One row per k = 0..steps.
std::vector<MetricsRow> compute_metrics(const netsim::FilterRun& run);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
/// Throws IoError on a malformed file.
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

/// Columns k,node,xhat_1..xhat_n,x_1..x_n (truth repeated per node).
void write_estimates_csv(std::ostream& os, const netsim::FilterRun& run);
/// Estimates of every node at step k plus one truth row.
void write_snapshot_csv(std::ostream& os, const netsim::FilterRun& run, Index k);

/// Mean of a column over rows with k in [k_from, k_to].
double time_average(const std::vector<MetricsRow>& rows, double MetricsRow::*field, Index k_from, Index k_to);

}  // namespace dkflab::metrics
