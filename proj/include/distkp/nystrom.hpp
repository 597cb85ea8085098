#pragma once

#include <cstdint>
#include <iosfwd>

#include "distkp/kernel.hpp"

namespace distkp {

/// E points drawn i.i.d. uniform in `domain`; deterministic in `seed`.
PointSet sample_representative_points(const Box& domain, std::size_t count, std::uint64_t seed);

/// Nyström feature space built from the eigendecomposition of K_RR.
///
/// Eigenpairs are kept in descending order. Eigenvalues at or below
/// rel_threshold * lambda_max are dropped, so the feature dimension is the
/// retained rank E' <= E. The full decomposition is kept for diagnostics and
/// serialization.
class NystromBasis {
 public:
  NystromBasis(KernelSpec spec, PointSet points, Matrix eigenvectors, Vector eigenvalues, double rel_threshold);

  const KernelSpec& kernel() const { return spec_; }
  const PointSet& points() const { return points_; }
  double rel_threshold() const { return rel_threshold_; }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.dim(); }
  std::size_t retained_rank() const { return retained_; }

  /// All E eigenpairs (descending).
  const Matrix& eigenvectors() const { return eigenvectors_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

  auto retained_eigenvectors() const { return eigenvectors_.leftCols(static_cast<Eigen::Index>(retained_)); }
  auto retained_eigenvalues() const { return eigenvalues_.head(static_cast<Eigen::Index>(retained_)); }

  /// U' diag(lambda')^{-1/2}, E x E'; maps K_Rx to the feature vector.
  const Matrix& projection() const { return projection_; }

 private:
  KernelSpec spec_;
  PointSet points_;
  Matrix eigenvectors_;
  Vector eigenvalues_;
  double rel_threshold_;
  std::size_t retained_ = 0;
  Matrix projection_;
};

inline constexpr double kDefaultRelThreshold = 1e-10;

NystromBasis build_basis(const KernelSpec& spec, const PointSet& points, double rel_threshold = kDefaultRelThreshold);

/// Phi(x) = Lambda^{-1/2} U^T K_Rx over the retained eigenpairs.
Vector feature_map(const NystromBasis& basis, const Vector& x);

/// Feature vectors of every point of X, one per row (|X| x E').
Matrix feature_matrix(const NystromBasis& basis, const PointSet& X);

/// K_xR U Lambda^{-1} U^T K_Rx' evaluated without forming feature vectors.
double nystrom_kernel(const NystromBasis& basis, const Vector& x, const Vector& xp);

/// Gram matrix of the Nyström kernel over X.
Matrix nystrom_gram(const NystromBasis& basis, const PointSet& X);

/// Approximate GP posterior using only E' x E' solves:
///   A = U^T K_RX K_XR U + s^2 Lambda,
///   mean = K_xR U A^{-1} U^T K_RX y,
///   var  = s^2 K_xR U A^{-1} U^T K_Rx.
GpPrediction nystrom_gp_posterior(const NystromBasis& basis, const PointSet& X, const Vector& y, double sigma_nu,
                                  const Vector& x_star);

/// Text dump of (R, Lambda, U). Values use 17 significant digits so reading back is exact.
///
///   distkp-nystrom-basis 1
///   kernel <rbf|laplace> <lengthscale>
///   rel_threshold <value>
///   size <E> <dim>
///   points            E rows: r_1, ..., r_dim
///   eigenvalues       E rows: lambda_k (descending)
///   eigenvectors      E rows: U(i, 0), ..., U(i, E-1)
void write_basis(std::ostream& out, const NystromBasis& basis);
NystromBasis read_basis(std::istream& in);

namespace serial {
Matrix feature_matrix(const NystromBasis& basis, const PointSet& X);
}  // namespace serial

}  // namespace distkp
