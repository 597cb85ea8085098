#include "distkp/types.hpp"

#include "distkp/errors.hpp"

namespace distkp {

Box make_box(std::size_t dim, double lo, double hi) {
  Box box{Vector::Constant(static_cast<Eigen::Index>(dim), lo), Vector::Constant(static_cast<Eigen::Index>(dim), hi)};
  validate_box(box);
  return box;
}

void validate_box(const Box& box) {
  if (box.lower.size() == 0 || box.lower.size() != box.upper.size()) {
    throw InputError("box bounds must be non-empty and of equal dimension");
  }
  if (!((box.upper - box.lower).array() > 0.0).all()) {
    throw InputError("box is degenerate: every upper bound must exceed its lower bound");
  }
}

PointSet uniform_grid(const Box& box, std::size_t per_axis) {
  validate_box(box);
  if (box.dim() != 2) throw InputError("uniform_grid supports 2-D boxes only");
  if (per_axis == 0) throw InputError("grid resolution must be positive");
  PointSet grid(per_axis * per_axis, 2);
  const Vector step = (box.upper - box.lower) / static_cast<double>(per_axis);
  for (std::size_t iy = 0; iy < per_axis; ++iy) {
    for (std::size_t ix = 0; ix < per_axis; ++ix) {
      auto r = grid.row(iy * per_axis + ix);
      r(0) = box.lower(0) + (static_cast<double>(ix) + 0.5) * step(0);
      r(1) = box.lower(1) + (static_cast<double>(iy) + 0.5) * step(1);
    }
  }
  return grid;
}

}  // namespace distkp
