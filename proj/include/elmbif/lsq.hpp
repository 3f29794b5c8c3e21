#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace elmbif {

enum class LinearMethod { SvdPinv, QrLsq };

std::string to_string(LinearMethod method);

struct LinearSolveConfig {
  LinearMethod method = LinearMethod::SvdPinv;
  /// Absolute singular-value cutoff. Empty means max(M, N) * eps * sigma_max.
  std::optional<double> svd_cutoff;
};

/// Raised when a rectangular solve cannot proceed (zero numerical rank, or a
/// rank-deficient matrix handed to the QR path).
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated-SVD pseudoinverse applied to rhs: V_q Sigma_q^+ U_q^T rhs.
/// Minimum-norm least-squares solution for any shape.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& j, const Eigen::VectorXd& rhs,
                           const LinearSolveConfig& cfg = {});

/// Minimum-norm solution of a full-row-rank system with M <= N through a QR
/// factorization of J^T. Throws RankError otherwise.
Eigen::VectorXd qr_lsq_solve(const Eigen::MatrixXd& j, const Eigen::VectorXd& rhs);

/// Dispatches on cfg.method.
Eigen::VectorXd lsq_solve(const Eigen::MatrixXd& j, const Eigen::VectorXd& rhs,
                          const LinearSolveConfig& cfg = {});

}  // namespace elmbif
