#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace dkflab {
class Rng;
}

namespace dkflab::sysmodel {

using Index = Eigen::Index;

/// Sensor i: y_i = H x + v_i with v_i ~ N(0, R).
struct SensorModel {
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;

  Index output_dim() const noexcept { return H.rows(); }
};

/// x_{k+1} = F x_k + w_k, w_k ~ N(0, Q), observed by independent sensors.
struct LinearGaussianSystem {
  Eigen::MatrixXd F;
  Eigen::MatrixXd Q;
  std::vector<SensorModel> sensors;

  Index state_dim() const noexcept { return F.rows(); }
  Index sensor_count() const noexcept { return static_cast<Index>(sensors.size()); }
  Index measurement_dim() const noexcept;
  Eigen::MatrixXd stacked_H() const;
  Eigen::MatrixXd stacked_R() const;

  /// Shape checks only; throws DimensionMismatch.
  void validate_dimensions() const;
  /// Shape checks plus Q and every R_i symmetric positive definite.
  void validate() const;
};

/// Truth states x_0..x_steps and, for each k, one measurement per sensor.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<std::vector<Eigen::VectorXd>> measurements;
  std::uint64_t seed = 0;

  Index steps() const noexcept { return static_cast<Index>(states.size()) - 1; }
  Eigen::VectorXd stacked_measurement(Index k) const;
};

/// Draws the noise sequence from a single Rng seeded with `seed`. Noise
/// covariances only need to be positive semi-definite here.
Trajectory simulate(const LinearGaussianSystem& sys, const Eigen::VectorXd& x0, Index steps, std::uint64_t seed);

/// Rank test on [H; HF; ...; HF^{n-1}] with singular values above
/// 1e-10 times the largest counted.
bool check_observability(const Eigen::MatrixXd& F, const Eigen::MatrixXd& H);

/// e^A by scaling and squaring with Pade approximation.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

/// Symmetric square root of a positive semi-definite matrix.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

/// `count` sensors with entries of H uniform on h_range and scalar-diagonal
/// R uniform on r_range (per output row).
std::vector<SensorModel> random_sensors(Index count, Index state_dim, Index rows, double h_lo, double h_hi,
                                        double r_lo, double r_hi, Rng& rng);

/// Splits a stacked model (H, diagonal R) into one sensor per row.
std::vector<SensorModel> split_rows(const Eigen::MatrixXd& H, const Eigen::VectorXd& r_diagonal);

/// CSV with header `k,x_1..x_n,y_1_1..` (sensor index, then row).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace dkflab::sysmodel
