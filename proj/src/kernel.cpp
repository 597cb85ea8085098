#include "distkp/kernel.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "distkp/errors.hpp"

namespace distkp {

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::Rbf ? "rbf" : "laplace";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "rbf" || name == "RBF") return KernelFamily::Rbf;
  if (name == "laplace" || name == "Laplace") return KernelFamily::Laplace;
  throw InputError(fmt::format("unknown kernel family '{}'", name));
}

void validate(const KernelSpec& spec) {
  if (!(spec.lengthscale > 0.0) || !std::isfinite(spec.lengthscale)) {
    throw InputError(fmt::format("kernel lengthscale must be positive and finite, got {}", spec.lengthscale));
  }
}

double kernel_from_distance(const KernelSpec& spec, double distance) {
  const double l = spec.lengthscale;
  switch (spec.family) {
    case KernelFamily::Rbf:
      return std::exp(-distance * distance / (2.0 * l * l));
    case KernelFamily::Laplace:
      return std::exp(-distance / l);
  }
  return 0.0;
}

namespace {

template <typename A, typename B>
double eval_rows(const KernelSpec& spec, const A& x, const B& z) {
  return kernel_from_distance(spec, (x - z).norm());
}

void check_sets(const PointSet& X, const PointSet& Z) {
  if (X.empty() || Z.empty()) throw InputError("covariance requires non-empty point sets");
  if (X.dim() != Z.dim()) {
    throw InputError(fmt::format("point dimension mismatch: {} vs {}", X.dim(), Z.dim()));
  }
}

}  // namespace

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& xp) {
  if (x.size() != xp.size()) {
    throw InputError(fmt::format("kernel arguments differ in dimension: {} vs {}", x.size(), xp.size()));
  }
  return kernel_from_distance(spec, (x - xp).norm());
}

Matrix cov_matrix(const KernelSpec& spec, const PointSet& X, const PointSet& Z) {
  check_sets(X, Z);
  const auto rows = static_cast<Eigen::Index>(X.size());
  const auto cols = static_cast<Eigen::Index>(Z.size());
  Matrix K(rows, cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      K(i, j) = eval_rows(spec, X.coords().row(i), Z.coords().row(j));
    }
  }
  return K;
}

Vector cov_vector(const KernelSpec& spec, const PointSet& X, const Vector& z) {
  if (X.dim() != static_cast<std::size_t>(z.size())) {
    throw InputError(fmt::format("point dimension mismatch: {} vs {}", X.dim(), z.size()));
  }
  Vector k(static_cast<Eigen::Index>(X.size()));
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    k(i) = eval_rows(spec, X.coords().row(i), z.transpose());
  }
  return k;
}

namespace serial {

Matrix cov_matrix(const KernelSpec& spec, const PointSet& X, const PointSet& Z) {
  check_sets(X, Z);
  Matrix K(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(Z.size()));
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      K(i, j) = eval_rows(spec, X.coords().row(i), Z.coords().row(j));
    }
  }
  return K;
}

}  // namespace serial

GpPrediction gp_posterior_from_gram(const Matrix& gram, const Vector& cross, double prior_variance,
                                    const Vector& y, double sigma_nu, const GpOptions& options) {
  if (gram.rows() != gram.cols() || gram.rows() != y.size() || cross.size() != y.size()) {
    throw InputError("gp posterior: Gram, cross-covariance and measurement sizes disagree");
  }
  if (!(sigma_nu >= 0.0)) throw InputError("measurement noise must be non-negative");

  Matrix regularized = gram;
  const double diag = sigma_nu > 0.0 ? sigma_nu * sigma_nu : options.jitter;
  regularized.diagonal().array() += diag;

  Eigen::LLT<Matrix> llt(regularized);
  if (llt.info() != Eigen::Success) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(regularized, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    throw NumericalError(fmt::format("regularized Gram matrix is not positive definite "
                                     "(eigenvalue range [{:.3e}, {:.3e}])",
                                     ev.minCoeff(), ev.maxCoeff()));
  }

  GpPrediction out;
  out.mean = cross.dot(llt.solve(y));
  out.variance = prior_variance - cross.dot(llt.solve(cross));
  if (out.variance < 0.0) {
    if (out.variance < -options.clamp_slack) {
      throw NumericalError(fmt::format("posterior variance {:.3e} is negative beyond round-off", out.variance));
    }
    out.variance = 0.0;
  }
  return out;
}

GpPrediction gp_posterior(const KernelSpec& spec, const PointSet& X, const Vector& y, double sigma_nu,
                          const Vector& x_star, const GpOptions& options) {
  validate(spec);
  if (X.size() != static_cast<std::size_t>(y.size())) {
    throw InputError("gp posterior: one measurement per training point is required");
  }
  const Matrix gram = cov_matrix(spec, X, X);
  const Vector cross = cov_vector(spec, X, x_star);
  return gp_posterior_from_gram(gram, cross, eval_kernel(spec, x_star, x_star), y, sigma_nu, options);
}

}  // namespace distkp
