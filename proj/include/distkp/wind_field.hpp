#pragma once

#include <vector>

#include "distkp/types.hpp"

namespace distkp {

/// Gaussian bump translating at constant velocity; its center wraps around the domain.
struct Cloud {
  Vector center;    ///< position at t = 0
  Vector velocity;  ///< domain units per step
  double amplitude = 1.0;
  double radius = 1.0;
};

/// Moving up/down-draft field, clamped to [-1, 1].
struct WindField {
  std::vector<Cloud> clouds;
  Box domain;
};

void validate(const WindField& field);

/// Center of `cloud` at time t: c(0) + t v, wrapped into the domain.
Vector cloud_center(const Cloud& cloud, const Box& domain, double t);

/// clamp(sum_j a_j exp(-||x - c_j(t)||^2 / (2 rho_j^2)), -1, 1)
double wind_eval(const WindField& field, const Vector& x, double t);

/// Field values at every grid point at time t.
Vector wind_grid(const WindField& field, const PointSet& grid, double t);

struct WindLayout {
  std::size_t updrafts = 3;
  double updraft_radius = 2.5;
  double downdraft_amplitude = -0.5;
  double downdraft_radius = 1.5;
  /// satellite offset from the updraft center, in updraft radii
  double satellite_offset = 1.6;
  double speed = 0.005;
};

/// Updraft clouds (a = +1) each flanked by two down-draft satellites sharing its velocity.
/// Placement and headings are drawn from `seed`.
WindField make_wind_field(const Box& domain, const WindLayout& layout, std::uint64_t seed);

}  // namespace distkp
