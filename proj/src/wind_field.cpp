#include "distkp/wind_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "distkp/errors.hpp"

namespace distkp {

void validate(const WindField& field) {
  validate_box(field.domain);
  for (const auto& c : field.clouds) {
    if (static_cast<std::size_t>(c.center.size()) != field.domain.dim() ||
        static_cast<std::size_t>(c.velocity.size()) != field.domain.dim()) {
      throw InputError("cloud center and velocity must match the domain dimension");
    }
    if (!(c.radius > 0.0)) throw InputError(fmt::format("cloud radius must be positive, got {}", c.radius));
    if (!(std::abs(c.amplitude) <= 1.0)) throw InputError("cloud amplitude must lie in [-1, 1]");
  }
}

Vector cloud_center(const Cloud& cloud, const Box& domain, double t) {
  Vector c = cloud.center + t * cloud.velocity;
  for (Eigen::Index d = 0; d < c.size(); ++d) {
    const double width = domain.upper(d) - domain.lower(d);
    double u = std::fmod(c(d) - domain.lower(d), width);
    if (u < 0.0) u += width;
    c(d) = domain.lower(d) + u;
  }
  return c;
}

double wind_eval(const WindField& field, const Vector& x, double t) {
  double value = 0.0;
  for (const auto& cloud : field.clouds) {
    const double r2 = (x - cloud_center(cloud, field.domain, t)).squaredNorm();
    value += cloud.amplitude * std::exp(-r2 / (2.0 * cloud.radius * cloud.radius));
  }
  return std::clamp(value, -1.0, 1.0);
}

Vector wind_grid(const WindField& field, const PointSet& grid, double t) {
  Vector out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out(static_cast<Eigen::Index>(i)) = wind_eval(field, grid.point(i), t);
  return out;
}

WindField make_wind_field(const Box& domain, const WindLayout& layout, std::uint64_t seed) {
  validate_box(domain);
  if (domain.dim() != 2) throw InputError("the wind model is defined on 2-D domains");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WindField field;
  field.domain = domain;
  const Vector extent = domain.upper - domain.lower;
  for (std::size_t k = 0; k < layout.updrafts; ++k) {
    // Spread updrafts over horizontal bands so they start apart.
    const double band = (static_cast<double>(k) + 0.25 + 0.5 * unit(rng)) / static_cast<double>(layout.updrafts);
    Vector center(2);
    center << domain.lower(0) + extent(0) * unit(rng), domain.lower(1) + extent(1) * band;
    const double heading = 2.0 * std::numbers::pi * unit(rng);
    Vector velocity(2);
    velocity << layout.speed * std::cos(heading), layout.speed * std::sin(heading);
    field.clouds.push_back(Cloud{center, velocity, 1.0, layout.updraft_radius});

    const double spin = 2.0 * std::numbers::pi * unit(rng);
    for (int side = 0; side < 2; ++side) {
      const double angle = spin + side * std::numbers::pi;
      Vector offset(2);
      offset << std::cos(angle), std::sin(angle);
      offset *= layout.satellite_offset * layout.updraft_radius;
      field.clouds.push_back(Cloud{center + offset, velocity, layout.downdraft_amplitude, layout.downdraft_radius});
    }
  }
  validate(field);
  return field;
}

}  // namespace distkp
