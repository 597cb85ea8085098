#pragma once

#include <string>
#include <string_view>

#include "distkp/types.hpp"

namespace distkp {

enum class KernelFamily { Rbf, Laplace };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Normalized exponential kernel: k(x, x) = 1, 0 < k <= 1.
struct KernelSpec {
  KernelFamily family = KernelFamily::Laplace;
  double lengthscale = 1.0;
};

void validate(const KernelSpec& spec);

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& xp);

/// Kernel value as a function of the Euclidean distance between the two arguments.
double kernel_from_distance(const KernelSpec& spec, double distance);

/// Covariance matrix K_XZ with entry (i, j) = k(x_i, z_j). Rows are split across OpenMP threads.
Matrix cov_matrix(const KernelSpec& spec, const PointSet& X, const PointSet& Z);

/// K_Xz for a single point z, as a column vector.
Vector cov_vector(const KernelSpec& spec, const PointSet& X, const Vector& z);

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct GpOptions {
  /// Added to the diagonal when the noise level is exactly zero.
  double jitter = 1e-10;
  /// Negative variances down to -clamp_slack are clamped to zero; anything lower is an error.
  double clamp_slack = 1e-10;
};

/// Zero-mean GP posterior at x* from precomputed covariances:
///   mean = k_sX (K_XX + s^2 I)^-1 y,  var = k_ss - k_sX (K_XX + s^2 I)^-1 k_Xs.
GpPrediction gp_posterior_from_gram(const Matrix& gram, const Vector& cross, double prior_variance,
                                    const Vector& y, double sigma_nu, const GpOptions& options = {});

GpPrediction gp_posterior(const KernelSpec& spec, const PointSet& X, const Vector& y, double sigma_nu,
                          const Vector& x_star, const GpOptions& options = {});

namespace serial {
Matrix cov_matrix(const KernelSpec& spec, const PointSet& X, const PointSet& Z);
}  // namespace serial

}  // namespace distkp
