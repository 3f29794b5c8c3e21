#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "elmbif/geometry.hpp"

namespace elmbif {

enum class Activation { Sigmoid, GaussianRbf };

std::string to_string(Activation kind);
Activation activation_from_string(const std::string& name);

/// Frozen hidden layer of an extreme learning machine.
///
/// Sigmoid neurons are psi_j(x) = 1 / (1 + exp(-(a_j . x + b_j))) with the
/// bias tied to an anchor point c_j through b_j = -a_j . c_j, so psi_j(c_j) = 1/2.
/// Gaussian neurons are psi_j(x) = exp(-eps_j^2 |x - c_j|^2).
///
/// Instances are immutable and can be shared between threads.
class ElmBasis {
 public:
  ElmBasis(Activation kind, Domain domain, std::uint64_t seed, Eigen::MatrixXd internal_weights,
           Eigen::VectorXd biases, Eigen::MatrixXd centers, Eigen::VectorXd steepness_sq);

  Activation kind() const { return kind_; }
  int size() const { return static_cast<int>(centers_.rows()); }
  int dim() const { return domain_.dim; }
  const Domain& domain() const { return domain_; }
  std::uint64_t seed() const { return seed_; }

  /// N x dim; empty for Gaussian bases.
  const Eigen::MatrixXd& internal_weights() const { return weights_; }
  /// N; empty for Gaussian bases.
  const Eigen::VectorXd& biases() const { return biases_; }
  /// N x dim anchor points (sigmoid) or kernel centers (Gaussian).
  const Eigen::MatrixXd& centers() const { return centers_; }
  /// N; empty for sigmoid bases.
  const Eigen::VectorXd& steepness_sq() const { return steepness_sq_; }

  Eigen::VectorXd eval(const Point& x) const;
  /// d psi_j / d x_axis.
  Eigen::VectorXd eval_d1(const Point& x, int axis) const;
  /// d^2 psi_j / d x_axis^2.
  Eigen::VectorXd eval_d2(const Point& x, int axis) const;

 private:
  void check_axis(int axis) const;

  Activation kind_;
  Domain domain_;
  std::uint64_t seed_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd biases_;
  Eigen::MatrixXd centers_;
  Eigen::VectorXd steepness_sq_;
};

/// Sigmoid basis with uniformly drawn internal weights.
///
/// 1D: a_j ~ U(-(N-55)/(10|I|), (N+35)/(10|I|)), redrawn until |a_j| > 1/(2|I|);
/// rejects N <= 10. 2D: each component ~ U(-(sqrt(N)-60)/(20|I_k|), (sqrt(N)+40)/(20|I_k|)).
/// Anchor points are equispaced (1D) or on a ceil(sqrt N)^2 lattice truncated to N (2D).
ElmBasis sample_sigmoid_basis(int n_neurons, const Domain& domain, std::uint64_t seed);

/// Gaussian basis with eps_j^2 ~ U(1/|I|, (N+65)/(15|I|)) in 1D and
/// U(1/(2|I|), (sqrt(N)+50)/(30|I|)) in 2D; centers placed as for sigmoids.
ElmBasis sample_rbf_basis(int n_neurons, const Domain& domain, std::uint64_t seed);

ElmBasis sample_basis(Activation kind, int n_neurons, const Domain& domain, std::uint64_t seed);

/// Equispaced anchor/center layout shared by both activation kinds.
Eigen::MatrixXd equispaced_centers(int n, const Domain& domain);

/// (S)_ij = psi_j(x_i).
Eigen::MatrixXd collocation_matrix(const ElmBasis& basis, std::span<const Point> points);

/// Row i holds d^order psi_j / d x_axis^order at x_i (order 1 or 2).
Eigen::MatrixXd derivative_matrix(const ElmBasis& basis, std::span<const Point> points, int axis,
                                  int order);

nlohmann::json to_json(const ElmBasis& basis);
ElmBasis basis_from_json(const nlohmann::json& doc);

}  // namespace elmbif
