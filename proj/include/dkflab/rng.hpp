#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace dkflab {

/// Seeded random source with a platform-independent output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the standard. The
/// standard library distributions are implementation-defined, so uniforms and
/// normals are derived here explicitly (53-bit mantissa fill, Marsaglia polar).
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64/polar-normal/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Eigen::VectorXd standard_normal(Eigen::Index n);
  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent sub-seed for stream `stream` derived from `base` (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace dkflab
