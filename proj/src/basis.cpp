#include "elmbif/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "elmbif/random.hpp"

namespace elmbif {

std::string to_string(Activation kind) {
  return kind == Activation::Sigmoid ? "sigmoid" : "gaussian-rbf";
}

Activation activation_from_string(const std::string& name) {
  if (name == "sigmoid" || name == "sf") return Activation::Sigmoid;
  if (name == "gaussian-rbf" || name == "rbf") return Activation::GaussianRbf;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

ElmBasis::ElmBasis(Activation kind, Domain domain, std::uint64_t seed,
                   Eigen::MatrixXd internal_weights, Eigen::VectorXd biases,
                   Eigen::MatrixXd centers, Eigen::VectorXd steepness_sq)
    : kind_(kind),
      domain_(domain),
      seed_(seed),
      weights_(std::move(internal_weights)),
      biases_(std::move(biases)),
      centers_(std::move(centers)),
      steepness_sq_(std::move(steepness_sq)) {
  domain_.validate();
  const Eigen::Index n = centers_.rows();
  if (n < 1 || centers_.cols() != domain_.dim) {
    throw std::invalid_argument("ElmBasis: centers must be N x dim with N >= 1");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Point c{centers_(j, 0), domain_.dim == 2 ? centers_(j, 1) : 0.0};
    if (!domain_.contains(c, 1e-12)) {
      throw std::invalid_argument("ElmBasis: center outside the domain");
    }
  }
  if (kind_ == Activation::Sigmoid) {
    if (weights_.rows() != n || weights_.cols() != domain_.dim || biases_.size() != n) {
      throw std::invalid_argument("ElmBasis: sigmoid weights/biases have the wrong shape");
    }
  } else {
    if (steepness_sq_.size() != n) {
      throw std::invalid_argument("ElmBasis: gaussian steepness has the wrong length");
    }
    if ((steepness_sq_.array() <= 0.0).any()) {
      throw std::invalid_argument("ElmBasis: gaussian steepness must be positive");
    }
  }
}

void ElmBasis::check_axis(int axis) const {
  if (axis < 0 || axis >= domain_.dim) throw std::out_of_range("ElmBasis: axis out of range");
}

namespace {

inline double logistic(double z) {
  // Symmetric form avoids overflow of exp for large |z|.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double sq_distance(const Eigen::MatrixXd& centers, Eigen::Index j, const Point& x, int dim) {
  double r2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = x[k] - centers(j, k);
    r2 += d * d;
  }
  return r2;
}

}  // namespace

Eigen::VectorXd ElmBasis::eval(const Point& x) const {
  const int n = size();
  Eigen::VectorXd out(n);
  if (kind_ == Activation::Sigmoid) {
    for (int j = 0; j < n; ++j) {
      double z = biases_(j);
      for (int k = 0; k < dim(); ++k) z += weights_(j, k) * x[k];
      out(j) = logistic(z);
    }
  } else {
    for (int j = 0; j < n; ++j) out(j) = std::exp(-steepness_sq_(j) * sq_distance(centers_, j, x, dim()));
  }
  return out;
}

Eigen::VectorXd ElmBasis::eval_d1(const Point& x, int axis) const {
  check_axis(axis);
  const int n = size();
  Eigen::VectorXd out(n);
  if (kind_ == Activation::Sigmoid) {
    for (int j = 0; j < n; ++j) {
      double z = biases_(j);
      for (int k = 0; k < dim(); ++k) z += weights_(j, k) * x[k];
      const double s = logistic(z);
      out(j) = weights_(j, axis) * s * (1.0 - s);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double e2 = steepness_sq_(j);
      const double phi = std::exp(-e2 * sq_distance(centers_, j, x, dim()));
      out(j) = -2.0 * e2 * (x[axis] - centers_(j, axis)) * phi;
    }
  }
  return out;
}

Eigen::VectorXd ElmBasis::eval_d2(const Point& x, int axis) const {
  check_axis(axis);
  const int n = size();
  Eigen::VectorXd out(n);
  if (kind_ == Activation::Sigmoid) {
    // a^2 e^z (1 - e^z) / (1 + e^z)^3 written through s = logistic(z).
    for (int j = 0; j < n; ++j) {
      double z = biases_(j);
      for (int k = 0; k < dim(); ++k) z += weights_(j, k) * x[k];
      const double s = logistic(z);
      const double a = weights_(j, axis);
      out(j) = a * a * s * (1.0 - s) * (1.0 - 2.0 * s);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double e2 = steepness_sq_(j);
      const double phi = std::exp(-e2 * sq_distance(centers_, j, x, dim()));
      const double d = x[axis] - centers_(j, axis);
      out(j) = -2.0 * e2 * (1.0 - 2.0 * e2 * d * d) * phi;
    }
  }
  return out;
}

Eigen::MatrixXd equispaced_centers(int n, const Domain& domain) {
  Eigen::MatrixXd c(n, domain.dim);
  if (domain.dim == 1) {
    const auto xs = linspace(domain.lower[0], domain.upper[0], n);
    for (int j = 0; j < n; ++j) c(j, 0) = xs[static_cast<std::size_t>(j)];
    return c;
  }
  int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (side * side < n) ++side;
  const auto xs = linspace(domain.lower[0], domain.upper[0], side);
  const auto ys = linspace(domain.lower[1], domain.upper[1], side);
  for (int j = 0; j < n; ++j) {
    c(j, 0) = xs[static_cast<std::size_t>(j % side)];
    c(j, 1) = ys[static_cast<std::size_t>(j / side)];
  }
  return c;
}

ElmBasis sample_sigmoid_basis(int n, const Domain& domain, std::uint64_t seed) {
  domain.validate();
  if (n < 2) throw std::invalid_argument("sample_sigmoid_basis: need at least 2 neurons");
  Rng rng(seed);
  Eigen::MatrixXd alpha(n, domain.dim);
  if (domain.dim == 1) {
    if (n <= 10) {
      throw std::invalid_argument("sample_sigmoid_basis: 1D sampling interval is empty for N <= 10");
    }
    const double len = domain.length(0);
    const double lo = -(n - 55.0) / (10.0 * len);
    const double hi = (n + 35.0) / (10.0 * len);
    const double min_abs = 1.0 / (2.0 * len);
    for (int j = 0; j < n; ++j) {
      double a = 0.0;
      do {
        a = rng.uniform(lo, hi);
      } while (std::abs(a) <= min_abs);
      alpha(j, 0) = a;
    }
  } else {
    const double root = std::sqrt(static_cast<double>(n));
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double len = domain.length(k);
        alpha(j, k) = rng.uniform(-(root - 60.0) / (20.0 * len), (root + 40.0) / (20.0 * len));
      }
    }
  }
  Eigen::MatrixXd centers = equispaced_centers(n, domain);
  Eigen::VectorXd beta(n);
  for (int j = 0; j < n; ++j) {
    double b = 0.0;
    for (int k = 0; k < domain.dim; ++k) b -= alpha(j, k) * centers(j, k);
    beta(j) = b;
  }
  return ElmBasis(Activation::Sigmoid, domain, seed, std::move(alpha), std::move(beta),
                  std::move(centers), Eigen::VectorXd());
}

ElmBasis sample_rbf_basis(int n, const Domain& domain, std::uint64_t seed) {
  domain.validate();
  if (n < 2) throw std::invalid_argument("sample_rbf_basis: need at least 2 neurons");
  const double len = domain.length(0);
  double lo = 0.0;
  double hi = 0.0;
  if (domain.dim == 1) {
    lo = 1.0 / len;
    hi = (n + 65.0) / (15.0 * len);
  } else {
    lo = 1.0 / (2.0 * len);
    hi = (std::sqrt(static_cast<double>(n)) + 50.0) / (30.0 * len);
  }
  if (!(lo < hi)) throw std::invalid_argument("sample_rbf_basis: empty steepness interval");
  Rng rng(seed);
  Eigen::VectorXd eps2(n);
  for (int j = 0; j < n; ++j) eps2(j) = rng.uniform(lo, hi);
  return ElmBasis(Activation::GaussianRbf, domain, seed, Eigen::MatrixXd(), Eigen::VectorXd(),
                  equispaced_centers(n, domain), std::move(eps2));
}

ElmBasis sample_basis(Activation kind, int n, const Domain& domain, std::uint64_t seed) {
  return kind == Activation::Sigmoid ? sample_sigmoid_basis(n, domain, seed)
                                     : sample_rbf_basis(n, domain, seed);
}

Eigen::MatrixXd collocation_matrix(const ElmBasis& basis, std::span<const Point> points) {
  Eigen::MatrixXd s(static_cast<Eigen::Index>(points.size()), basis.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    s.row(static_cast<Eigen::Index>(i)) = basis.eval(points[i]).transpose();
  }
  return s;
}

Eigen::MatrixXd derivative_matrix(const ElmBasis& basis, std::span<const Point> points, int axis,
                                  int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("derivative_matrix: order must be 1 or 2");
  Eigen::MatrixXd d(static_cast<Eigen::Index>(points.size()), basis.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    d.row(static_cast<Eigen::Index>(i)) =
        (order == 1 ? basis.eval_d1(points[i], axis) : basis.eval_d2(points[i], axis)).transpose();
  }
  return d;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), k) = rows[i].at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

}  // namespace

nlohmann::json to_json(const ElmBasis& basis) {
  const Domain& d = basis.domain();
  nlohmann::json doc;
  doc["kind"] = to_string(basis.kind());
  doc["n_neurons"] = basis.size();
  doc["seed"] = basis.seed();
  doc["domain"] = {{"dim", d.dim},
                   {"lower", std::vector<double>(d.lower.begin(), d.lower.begin() + d.dim)},
                   {"upper", std::vector<double>(d.upper.begin(), d.upper.begin() + d.dim)}};
  doc["centers"] = matrix_to_json(basis.centers());
  if (basis.kind() == Activation::Sigmoid) {
    doc["internal_weights"] = matrix_to_json(basis.internal_weights());
    doc["biases"] = std::vector<double>(basis.biases().data(), basis.biases().data() + basis.size());
  } else {
    doc["steepness_sq"] =
        std::vector<double>(basis.steepness_sq().data(), basis.steepness_sq().data() + basis.size());
  }
  return doc;
}

ElmBasis basis_from_json(const nlohmann::json& doc) {
  const auto kind = activation_from_string(doc.at("kind").get<std::string>());
  const auto& jd = doc.at("domain");
  const int dim = jd.at("dim").get<int>();
  const auto lo = jd.at("lower").get<std::vector<double>>();
  const auto hi = jd.at("upper").get<std::vector<double>>();
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) {
    throw std::invalid_argument("basis_from_json: domain bounds do not match dim");
  }
  const Domain domain = dim == 1 ? Domain::interval(lo[0], hi[0])
                                 : Domain::rectangle(lo[0], hi[0], lo[1], hi[1]);
  const auto seed = doc.at("seed").get<std::uint64_t>();
  Eigen::MatrixXd centers = matrix_from_json(doc.at("centers"), dim);
  if (kind == Activation::Sigmoid) {
    return ElmBasis(kind, domain, seed, matrix_from_json(doc.at("internal_weights"), dim),
                    vector_from_json(doc.at("biases")), std::move(centers), Eigen::VectorXd());
  }
  return ElmBasis(kind, domain, seed, Eigen::MatrixXd(), Eigen::VectorXd(), std::move(centers),
                  vector_from_json(doc.at("steepness_sq")));
}

}  // namespace elmbif
