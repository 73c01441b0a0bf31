#include "dkflab/matops.hpp"

#include <cmath>
#include <sstream>

namespace dkflab::matops {

Index packed_dim(Index length) {
  if (length <= 0) throw Error(Errc::bad_length, "packed vector must be non-empty");
  const auto n = static_cast<Index>(std::llround((std::sqrt(8.0 * static_cast<double>(length) + 1.0) - 1.0) / 2.0));
  if (packed_size(n) != length) {
    std::ostringstream os;
    os << "length " << length << " is not n(n+1)/2 for any integer n";
    throw Error(Errc::bad_length, os.str());
  }
  return n;
}

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  return asym <= rel_tol * scale;
}

SymPacked vech(const Eigen::MatrixXd& m) {
  return SymPacked{m.rows(), vech_vector(m)};
}

Eigen::VectorXd vech_vector(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(Errc::non_square, "vech requires a square matrix");
  if (!is_symmetric(m)) throw Error(Errc::asymmetric_input, "vech requires a symmetric matrix");
  const Index n = m.rows();
  Eigen::VectorXd out(packed_size(n));
  Index pos = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) out[pos++] = m(i, j);
  return out;
}

Eigen::MatrixXd invvech(const SymPacked& v) {
  if (v.data.size() != packed_size(v.dim)) {
    std::ostringstream os;
    os << "expected " << packed_size(v.dim) << " entries for dim " << v.dim << ", got " << v.data.size();
    throw Error(Errc::bad_length, os.str());
  }
  const Index n = v.dim;
  Eigen::MatrixXd m(n, n);
  Index pos = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      m(i, j) = v.data[pos];
      m(j, i) = v.data[pos];
      ++pos;
    }
  }
  return m;
}

Eigen::MatrixXd invvech(const Eigen::VectorXd& data) {
  return invvech(SymPacked{packed_dim(data.size()), data});
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(Errc::non_square, "spd_inverse requires a square matrix");
  if (!m.allFinite()) throw Error(Errc::not_positive_definite, "matrix has non-finite entries");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::not_positive_definite, "Cholesky factorization failed");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  if (!inv.allFinite()) throw Error(Errc::not_positive_definite, "inverse is not finite");
  return symmetrize(inv);
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(m));
  return llt.info() == Eigen::Success;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void require_shape(const Eigen::MatrixXd& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols;
    throw Error(Errc::dimension_mismatch, os.str());
  }
}

}  // namespace dkflab::matops
