#include "dkflab/sysmodel.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"
#include "dkflab/rng.hpp"

namespace dkflab::sysmodel {

Index LinearGaussianSystem::measurement_dim() const noexcept {
  Index m = 0;
  for (const auto& s : sensors) m += s.output_dim();
  return m;
}

Eigen::MatrixXd LinearGaussianSystem::stacked_H() const {
  Eigen::MatrixXd h(measurement_dim(), state_dim());
  Index row = 0;
  for (const auto& s : sensors) {
    h.middleRows(row, s.output_dim()) = s.H;
    row += s.output_dim();
  }
  return h;
}

Eigen::MatrixXd LinearGaussianSystem::stacked_R() const {
  const Index m = measurement_dim();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  Index row = 0;
  for (const auto& s : sensors) {
    r.block(row, row, s.output_dim(), s.output_dim()) = s.R;
    row += s.output_dim();
  }
  return r;
}

void LinearGaussianSystem::validate_dimensions() const {
  const Index n = state_dim();
  if (n == 0) throw Error(Errc::dimension_mismatch, "state dimension must be positive");
  matops::require_shape(F, n, n, "F");
  matops::require_shape(Q, n, n, "Q");
  if (sensors.empty()) throw Error(Errc::dimension_mismatch, "system needs at least one sensor");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const auto& s = sensors[i];
    const std::string tag = "sensor " + std::to_string(i);
    if (s.output_dim() == 0) throw Error(Errc::dimension_mismatch, tag + " has no outputs");
    matops::require_shape(s.H, s.output_dim(), n, (tag + " H").c_str());
    matops::require_shape(s.R, s.output_dim(), s.output_dim(), (tag + " R").c_str());
  }
}

void LinearGaussianSystem::validate() const {
  validate_dimensions();
  if (!matops::is_symmetric(Q) || !matops::is_positive_definite(Q))
    throw Error(Errc::not_positive_definite, "Q must be symmetric positive definite");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const auto& r = sensors[i].R;
    if (!matops::is_symmetric(r) || !matops::is_positive_definite(r))
      throw Error(Errc::not_positive_definite, "R of sensor " + std::to_string(i) + " must be symmetric positive definite");
  }
}

Eigen::VectorXd Trajectory::stacked_measurement(Index k) const {
  const auto& ys = measurements.at(static_cast<std::size_t>(k));
  Index m = 0;
  for (const auto& y : ys) m += y.size();
  Eigen::VectorXd out(m);
  Index row = 0;
  for (const auto& y : ys) {
    out.segment(row, y.size()) = y;
    row += y.size();
  }
  return out;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matops::symmetrize(cov));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Trajectory simulate(const LinearGaussianSystem& sys, const Eigen::VectorXd& x0, Index steps, std::uint64_t seed) {
  sys.validate_dimensions();
  if (x0.size() != sys.state_dim()) throw Error(Errc::dimension_mismatch, "x0 does not match the state dimension");
  if (steps < 1) throw Error(Errc::dimension_mismatch, "simulate needs at least one step");

  const Eigen::MatrixXd q_root = psd_sqrt(sys.Q);
  std::vector<Eigen::MatrixXd> r_roots;
  r_roots.reserve(sys.sensors.size());
  for (const auto& s : sys.sensors) r_roots.push_back(psd_sqrt(s.R));

  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(static_cast<std::size_t>(steps + 1));
  traj.measurements.reserve(static_cast<std::size_t>(steps + 1));

  Eigen::VectorXd x = x0;
  for (Index k = 0; k <= steps; ++k) {
    if (k > 0) x = sys.F * x + q_root * rng.standard_normal(sys.state_dim());
    std::vector<Eigen::VectorXd> ys;
    ys.reserve(sys.sensors.size());
    for (std::size_t i = 0; i < sys.sensors.size(); ++i) {
      const auto& s = sys.sensors[i];
      ys.push_back(s.H * x + r_roots[i] * rng.standard_normal(s.output_dim()));
    }
    traj.states.push_back(x);
    traj.measurements.push_back(std::move(ys));
  }
  return traj;
}

bool check_observability(const Eigen::MatrixXd& F, const Eigen::MatrixXd& H) {
  const Index n = F.rows();
  matops::require_shape(F, n, n, "F");
  matops::require_shape(H, H.rows(), n, "H");
  const Index m = H.rows();
  Eigen::MatrixXd obs(n * m, n);
  Eigen::MatrixXd block = H;
  for (Index p = 0; p < n; ++p) {
    obs.middleRows(p * m, m) = block;
    block = block * F;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return false;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  return rank == n;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(Errc::non_square, "matrix exponential needs a square matrix");
  return a.exp();
}

std::vector<SensorModel> random_sensors(Index count, Index state_dim, Index rows, double h_lo, double h_hi,
                                        double r_lo, double r_hi, Rng& rng) {
  std::vector<SensorModel> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    SensorModel s;
    s.H = rng.uniform_matrix(rows, state_dim, h_lo, h_hi);
    s.R = Eigen::MatrixXd::Zero(rows, rows);
    for (Index r = 0; r < rows; ++r) s.R(r, r) = rng.uniform(r_lo, r_hi);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SensorModel> split_rows(const Eigen::MatrixXd& H, const Eigen::VectorXd& r_diagonal) {
  if (r_diagonal.size() != H.rows()) throw Error(Errc::dimension_mismatch, "R diagonal must match the rows of H");
  std::vector<SensorModel> out;
  for (Index r = 0; r < H.rows(); ++r) out.push_back({H.row(r), Eigen::MatrixXd::Constant(1, 1, r_diagonal[r])});
  return out;
}

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.empty()) return;
  os << "k";
  for (Index j = 0; j < traj.states.front().size(); ++j) os << ",x_" << j + 1;
  const auto& first = traj.measurements.front();
  for (std::size_t i = 0; i < first.size(); ++i)
    for (Index r = 0; r < first[i].size(); ++r) os << ",y_" << i + 1 << '_' << r + 1;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << k;
    for (Index j = 0; j < traj.states[k].size(); ++j) {
      os << ',';
      put(os, traj.states[k][j]);
    }
    for (const auto& y : traj.measurements[k]) {
      for (Index r = 0; r < y.size(); ++r) {
        os << ',';
        put(os, y[r]);
      }
    }
    os << '\n';
  }
}

}  // namespace dkflab::sysmodel
