#include "elmbif/lsq.hpp"

#include <algorithm>
#include <limits>

namespace elmbif {

std::string to_string(LinearMethod method) {
  return method == LinearMethod::SvdPinv ? "svd-pinv" : "qr-lsq";
}

Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& j, const Eigen::VectorXd& rhs,
                           const LinearSolveConfig& cfg) {
  if (j.rows() < 1 || j.cols() < 1) throw std::invalid_argument("pinv_solve: empty matrix");
  if (rhs.size() != j.rows()) throw std::invalid_argument("pinv_solve: rhs length mismatch");
  if (!j.allFinite() || !rhs.allFinite()) throw std::invalid_argument("pinv_solve: non-finite input");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  const double cutoff =
      cfg.svd_cutoff.value_or(static_cast<double>(std::max(j.rows(), j.cols())) *
                              std::numeric_limits<double>::epsilon() * smax);
  Eigen::Index q = 0;
  while (q < sigma.size() && sigma(q) > cutoff) ++q;
  if (q == 0) throw RankError("pinv_solve: rank zero (all singular values below cutoff)");

  Eigen::VectorXd coeff = svd.matrixU().leftCols(q).transpose() * rhs;
  coeff.array() /= sigma.head(q).array();
  return svd.matrixV().leftCols(q) * coeff;
}

Eigen::VectorXd qr_lsq_solve(const Eigen::MatrixXd& j, const Eigen::VectorXd& rhs) {
  const Eigen::Index m = j.rows();
  const Eigen::Index n = j.cols();
  if (m < 1 || n < 1) throw std::invalid_argument("qr_lsq_solve: empty matrix");
  if (rhs.size() != m) throw std::invalid_argument("qr_lsq_solve: rhs length mismatch");
  if (m > n) throw RankError("qr_lsq_solve: more rows than columns; use SvdPinv");

  // J^T P = Q R, hence J = P R^T Q^T and the minimum-norm solution is
  // x = Q_1 R_1^{-T} P^T rhs.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(j.transpose());
  if (qr.rank() < m) {
    throw RankError("qr_lsq_solve: rank-deficient Jacobian (rank " + std::to_string(qr.rank()) +
                    " < " + std::to_string(m) + "); use SvdPinv");
  }
  const Eigen::VectorXd permuted = qr.colsPermutation().transpose() * rhs;
  const auto r1 = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  const Eigen::VectorXd y = r1.transpose().solve(permuted);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(n);
  padded.head(m) = y;
  return qr.householderQ() * padded;
}

Eigen::VectorXd lsq_solve(const Eigen::MatrixXd& j, const Eigen::VectorXd& rhs,
                          const LinearSolveConfig& cfg) {
  return cfg.method == LinearMethod::SvdPinv ? pinv_solve(j, rhs, cfg) : qr_lsq_solve(j, rhs);
}

}  // namespace elmbif
