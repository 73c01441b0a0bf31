#pragma once

#include <Eigen/Dense>

#include "dkflab/error.hpp"

namespace dkflab::matops {

using Index = Eigen::Index;

/// Half-vectorized symmetric matrix.
///
/// Entries are the upper triangle enumerated row by row:
/// [M11; M12; ...; M1n; M22; ...; M2n; ...; Mnn].
struct SymPacked {
  Index dim = 0;
  Eigen::VectorXd data;
};

/// Number of packed entries for an n x n symmetric matrix.
constexpr Index packed_size(Index n) noexcept { return n * (n + 1) / 2; }

/// Inverse of packed_size; throws BadLength if `length` is not triangular.
Index packed_dim(Index length);

/// Relative tolerance used by `vech` to accept a matrix as symmetric.
inline constexpr double kSymmetryTolerance = 1e-10;

SymPacked vech(const Eigen::MatrixXd& m);
Eigen::VectorXd vech_vector(const Eigen::MatrixXd& m);

Eigen::MatrixXd invvech(const SymPacked& v);
/// Overload for a bare vector; the dimension is recovered from the length.
Eigen::MatrixXd invvech(const Eigen::VectorXd& data);

/// (M + M^T) / 2
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

/// Inverse of a symmetric positive-definite matrix via Cholesky, symmetrized.
/// Throws NotPositiveDefinite if the factorization fails.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m);

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol = kSymmetryTolerance);
bool is_positive_definite(const Eigen::MatrixXd& m);

/// Largest singular value (the induced 2-norm).
double spectral_norm(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Throws DimensionMismatch naming `what` unless `m` is rows x cols.
void require_shape(const Eigen::MatrixXd& m, Index rows, Index cols, const char* what);

}  // namespace dkflab::matops
