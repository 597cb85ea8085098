#include "distkp/nystrom.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "distkp/errors.hpp"

namespace distkp {

PointSet sample_representative_points(const Box& domain, std::size_t count, std::uint64_t seed) {
  validate_box(domain);
  if (count == 0) throw InputError("at least one representative point is required");
  std::mt19937_64 rng(seed);
  PointSet points(count, domain.dim());
  std::vector<std::uniform_real_distribution<double>> axes;
  for (std::size_t d = 0; d < domain.dim(); ++d) {
    axes.emplace_back(domain.lower(static_cast<Eigen::Index>(d)), domain.upper(static_cast<Eigen::Index>(d)));
  }
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < domain.dim(); ++d) {
      points.row(i)(static_cast<Eigen::Index>(d)) = axes[d](rng);
    }
  }
  return points;
}

NystromBasis::NystromBasis(KernelSpec spec, PointSet points, Matrix eigenvectors, Vector eigenvalues,
                           double rel_threshold)
    : spec_(spec),
      points_(std::move(points)),
      eigenvectors_(std::move(eigenvectors)),
      eigenvalues_(std::move(eigenvalues)),
      rel_threshold_(rel_threshold) {
  validate(spec_);
  const auto e = static_cast<Eigen::Index>(points_.size());
  if (e == 0) throw InputError("Nyström basis needs at least one representative point");
  if (eigenvectors_.rows() != e || eigenvectors_.cols() != e || eigenvalues_.size() != e) {
    throw InputError("eigendecomposition size does not match the representative set");
  }
  if (!(rel_threshold_ >= 0.0 && rel_threshold_ < 1.0)) {
    throw InputError(fmt::format("relative truncation threshold must lie in [0, 1), got {}", rel_threshold_));
  }
  const double cutoff = rel_threshold_ * eigenvalues_(0);
  while (retained_ < static_cast<std::size_t>(e) && eigenvalues_(static_cast<Eigen::Index>(retained_)) > cutoff &&
         eigenvalues_(static_cast<Eigen::Index>(retained_)) > 0.0) {
    ++retained_;
  }
  if (retained_ == 0) throw NumericalError("Nyström basis has no positive eigenvalue");
  const auto r = static_cast<Eigen::Index>(retained_);
  projection_ = eigenvectors_.leftCols(r) * eigenvalues_.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
}

NystromBasis build_basis(const KernelSpec& spec, const PointSet& points, double rel_threshold) {
  validate(spec);
  Matrix k_rr = cov_matrix(spec, points, points);
  if (!k_rr.allFinite()) throw NumericalError("kernel matrix of representative points has non-finite entries");
  k_rr = 0.5 * (k_rr + k_rr.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(k_rr);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of K_RR did not converge");
  // Eigen returns ascending order.
  const Vector values = eig.eigenvalues().reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  return NystromBasis(spec, points, vectors, values, rel_threshold);
}

namespace {

void check_dim(const NystromBasis& basis, Eigen::Index d) {
  if (static_cast<std::size_t>(d) != basis.dim()) {
    throw InputError(fmt::format("query dimension {} does not match basis dimension {}", d, basis.dim()));
  }
}

Vector cross_cov(const NystromBasis& basis, const Vector& x) {
  check_dim(basis, x.size());
  return cov_vector(basis.kernel(), basis.points(), x);
}

// Feature row for point i of X; shared by the serial and parallel paths.
void feature_row(const NystromBasis& basis, const PointSet& X, Eigen::Index i, Matrix& out) {
  const auto& R = basis.points().coords();
  Eigen::RowVectorXd k(R.rows());
  for (Eigen::Index j = 0; j < R.rows(); ++j) {
    k(j) = kernel_from_distance(basis.kernel(), (X.coords().row(i) - R.row(j)).norm());
  }
  out.row(i).noalias() = k * basis.projection();
}

}  // namespace

Vector feature_map(const NystromBasis& basis, const Vector& x) {
  return basis.projection().transpose() * cross_cov(basis, x);
}

Matrix feature_matrix(const NystromBasis& basis, const PointSet& X) {
  check_dim(basis, static_cast<Eigen::Index>(X.dim()));
  const auto rows = static_cast<Eigen::Index>(X.size());
  Matrix out(rows, static_cast<Eigen::Index>(basis.retained_rank()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) feature_row(basis, X, i, out);
  return out;
}

namespace serial {

Matrix feature_matrix(const NystromBasis& basis, const PointSet& X) {
  check_dim(basis, static_cast<Eigen::Index>(X.dim()));
  Matrix out(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(basis.retained_rank()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) feature_row(basis, X, i, out);
  return out;
}

}  // namespace serial

double nystrom_kernel(const NystromBasis& basis, const Vector& x, const Vector& xp) {
  const auto u = basis.retained_eigenvectors();
  const Vector a = u.transpose() * cross_cov(basis, x);
  const Vector b = u.transpose() * cross_cov(basis, xp);
  return (a.array() * b.array() / basis.retained_eigenvalues().array()).sum();
}

Matrix nystrom_gram(const NystromBasis& basis, const PointSet& X) {
  const Matrix phi = feature_matrix(basis, X);
  return phi * phi.transpose();
}

GpPrediction nystrom_gp_posterior(const NystromBasis& basis, const PointSet& X, const Vector& y, double sigma_nu,
                                  const Vector& x_star) {
  if (X.size() != static_cast<std::size_t>(y.size())) {
    throw InputError("Nyström posterior: one measurement per training point is required");
  }
  if (!(sigma_nu >= 0.0)) throw InputError("measurement noise must be non-negative");
  const auto u = basis.retained_eigenvectors();
  const auto r = static_cast<Eigen::Index>(basis.retained_rank());

  // One pass over the measurements: accumulate U^T K_RX K_XR U and U^T K_RX y.
  Matrix a = Matrix::Zero(r, r);
  Vector rhs = Vector::Zero(r);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const Vector b = u.transpose() * cross_cov(basis, X.point(i));
    a.selfadjointView<Eigen::Lower>().rankUpdate(b);
    rhs += y(static_cast<Eigen::Index>(i)) * b;
  }
  a = a.selfadjointView<Eigen::Lower>();
  a.diagonal() += sigma_nu * sigma_nu * basis.retained_eigenvalues();

  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(fmt::format("Nyström system ({}x{}) is singular; add measurement noise or measurements", r, r));
  }
  const Vector b_star = u.transpose() * cross_cov(basis, x_star);
  GpPrediction out;
  out.mean = b_star.dot(llt.solve(rhs));
  out.variance = std::max(0.0, sigma_nu * sigma_nu * b_star.dot(llt.solve(b_star)));
  return out;
}

void write_basis(std::ostream& out, const NystromBasis& basis) {
  const auto e = static_cast<Eigen::Index>(basis.size());
  const auto d = static_cast<Eigen::Index>(basis.dim());
  fmt::print(out, "distkp-nystrom-basis 1\n");
  fmt::print(out, "kernel {} {:.17g}\n", to_string(basis.kernel().family), basis.kernel().lengthscale);
  fmt::print(out, "rel_threshold {:.17g}\n", basis.rel_threshold());
  fmt::print(out, "size {} {}\n", e, d);
  fmt::print(out, "points\n");
  for (Eigen::Index i = 0; i < e; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) fmt::print(out, "{}{:.17g}", j ? "," : "", basis.points().coords()(i, j));
    fmt::print(out, "\n");
  }
  fmt::print(out, "eigenvalues\n");
  for (Eigen::Index i = 0; i < e; ++i) fmt::print(out, "{:.17g}\n", basis.eigenvalues()(i));
  fmt::print(out, "eigenvectors\n");
  for (Eigen::Index i = 0; i < e; ++i) {
    for (Eigen::Index j = 0; j < e; ++j) fmt::print(out, "{}{:.17g}", j ? "," : "", basis.eigenvectors()(i, j));
    fmt::print(out, "\n");
  }
}

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(fmt::format("basis dump truncated while reading {}", what));
  return line;
}

void expect_line(std::istream& in, const std::string& tag) {
  const std::string line = next_line(in, tag.c_str());
  if (line != tag) throw InputError(fmt::format("basis dump: expected '{}', found '{}'", tag, line));
}

std::vector<double> parse_row(const std::string& line, std::size_t expected) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InputError(fmt::format("basis dump: malformed number '{}'", cell));
    }
  }
  if (values.size() != expected) {
    throw InputError(fmt::format("basis dump: expected {} values per row, found {}", expected, values.size()));
  }
  return values;
}

}  // namespace

NystromBasis read_basis(std::istream& in) {
  expect_line(in, "distkp-nystrom-basis 1");
  std::string tag, family;
  KernelSpec spec;
  double threshold = 0.0;
  long e = 0, d = 0;
  {
    std::istringstream ss(next_line(in, "kernel"));
    if (!(ss >> tag >> family >> spec.lengthscale) || tag != "kernel") throw InputError("basis dump: bad kernel line");
    spec.family = parse_kernel_family(family);
  }
  {
    std::istringstream ss(next_line(in, "rel_threshold"));
    if (!(ss >> tag >> threshold) || tag != "rel_threshold") throw InputError("basis dump: bad threshold line");
  }
  {
    std::istringstream ss(next_line(in, "size"));
    if (!(ss >> tag >> e >> d) || tag != "size" || e <= 0 || d <= 0) throw InputError("basis dump: bad size line");
  }
  PointSet points(static_cast<std::size_t>(e), static_cast<std::size_t>(d));
  Vector values(e);
  Matrix vectors(e, e);
  expect_line(in, "points");
  for (long i = 0; i < e; ++i) {
    const auto row = parse_row(next_line(in, "points"), static_cast<std::size_t>(d));
    for (long j = 0; j < d; ++j) points.coords()(i, j) = row[static_cast<std::size_t>(j)];
  }
  expect_line(in, "eigenvalues");
  for (long i = 0; i < e; ++i) values(i) = parse_row(next_line(in, "eigenvalues"), 1)[0];
  expect_line(in, "eigenvectors");
  for (long i = 0; i < e; ++i) {
    const auto row = parse_row(next_line(in, "eigenvectors"), static_cast<std::size_t>(e));
    for (long j = 0; j < e; ++j) vectors(i, j) = row[static_cast<std::size_t>(j)];
  }
  return NystromBasis(spec, std::move(points), std::move(vectors), std::move(values), threshold);
}

}  // namespace distkp
