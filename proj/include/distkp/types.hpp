#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace distkp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ordered set of points in R^s, one point per row. Row order indexes Gram matrices.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(Matrix coords) : coords_(std::move(coords)) {}
  PointSet(std::size_t count, std::size_t dim) : coords_(Matrix::Zero(count, dim)) {}

  std::size_t size() const { return static_cast<std::size_t>(coords_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(coords_.cols()); }
  bool empty() const { return coords_.rows() == 0; }

  Vector point(std::size_t i) const { return coords_.row(static_cast<Eigen::Index>(i)).transpose(); }
  auto row(std::size_t i) { return coords_.row(static_cast<Eigen::Index>(i)); }
  auto row(std::size_t i) const { return coords_.row(static_cast<Eigen::Index>(i)); }

  const Matrix& coords() const { return coords_; }
  Matrix& coords() { return coords_; }

 private:
  Matrix coords_;
};

/// Axis-aligned box [lower, upper] in R^s.
struct Box {
  Vector lower;
  Vector upper;

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  bool contains(const Vector& x, double slack = 0.0) const {
    return ((x - lower).array() >= -slack).all() && ((upper - x).array() >= -slack).all();
  }
};

Box make_box(std::size_t dim, double lo, double hi);
void validate_box(const Box& box);

/// Uniform grid of `per_axis` points along each axis of a 2-D box, cell centers, row-major in y then x.
PointSet uniform_grid(const Box& box, std::size_t per_axis);

}  // namespace distkp
