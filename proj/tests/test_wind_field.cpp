#include <doctest.h>

#include <cmath>

#include "distkp/errors.hpp"
#include "distkp/wind_field.hpp"

using namespace distkp;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

WindField single(double amplitude, const Vector& velocity) {
  return WindField{{Cloud{v2(10.0, 10.0), velocity, amplitude, 1.5}}, make_box(2, 0.0, 20.0)};
}

}  // namespace

TEST_CASE("single cloud peak and decay") {
  const auto f = single(1.0, v2(0.0, 0.0));
  CHECK(wind_eval(f, v2(10.0, 10.0), 0.0) == 1.0);
  CHECK(std::abs(wind_eval(f, v2(0.5, 0.5), 0.0)) < 1e-12);
  // One radius away: exp(-1/2).
  CHECK(wind_eval(f, v2(11.5, 10.0), 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(wind_eval(single(-0.5, v2(0, 0)), v2(10.0, 10.0), 7.0) == -0.5);
}

TEST_CASE("translation identity for an unwrapped cloud") {
  const Vector vel = v2(0.03, -0.02);
  const auto f = single(1.0, vel);
  for (double t : {0.0, 5.0, 40.0}) {
    for (const Vector& x : {v2(9.0, 11.0), v2(10.4, 10.2), v2(12.0, 8.0)}) {
      CHECK(wind_eval(f, x, t + 1.0) == doctest::Approx(wind_eval(f, x - vel, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cloud centers wrap around the domain") {
  const Cloud c{v2(19.0, 1.0), v2(0.5, -0.5), 1.0, 1.0};
  const Box box = make_box(2, 0.0, 20.0);
  const Vector at4 = cloud_center(c, box, 4.0);
  CHECK(at4(0) == doctest::Approx(1.0));
  CHECK(at4(1) == doctest::Approx(19.0));
  CHECK(box.contains(cloud_center(c, box, 1234.0)));
}

TEST_CASE("clamping to [-1, 1]") {
  WindField f{{Cloud{v2(5, 5), v2(0, 0), 1.0, 2.0}, Cloud{v2(5, 5), v2(0, 0), 1.0, 2.0},
               Cloud{v2(15, 15), v2(0, 0), -0.8, 2.0}, Cloud{v2(15, 15), v2(0, 0), -0.8, 2.0}},
              make_box(2, 0.0, 20.0)};
  CHECK(wind_eval(f, v2(5, 5), 0.0) == 1.0);
  CHECK(wind_eval(f, v2(15, 15), 0.0) == -1.0);
}

TEST_CASE("generated layouts stay bounded and move") {
  const Box box = make_box(2, 0.0, 20.0);
  const auto grid = uniform_grid(box, 40);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = make_wind_field(box, WindLayout{}, seed);
    CHECK(f.clouds.size() == 9);
    const Vector g0 = wind_grid(f, grid, 0.0);
    const Vector g1 = wind_grid(f, grid, 100.0);
    CHECK(g0.maxCoeff() <= 1.0);
    CHECK(g0.minCoeff() >= -1.0);
    CHECK(g0.maxCoeff() > 0.5);
    CHECK(g0.minCoeff() < -0.1);
    CHECK((g1 - g0).norm() > 1.0);
    for (Eigen::Index i = 0; i < grid.coords().rows(); i += 97)
      CHECK(wind_grid(f, grid, 3.0)(i) == wind_eval(f, grid.point(static_cast<std::size_t>(i)), 3.0));
  }
  const auto a = make_wind_field(box, WindLayout{}, 3);
  const auto b = make_wind_field(box, WindLayout{}, 3);
  CHECK(wind_grid(a, grid, 10.0) == wind_grid(b, grid, 10.0));
}

TEST_CASE("invalid fields are rejected") {
  auto f = single(1.0, v2(0, 0));
  f.clouds[0].radius = 0.0;
  CHECK_THROWS_AS(validate(f), InputError);
  f = single(1.0, v2(0, 0));
  f.clouds[0].center = Vector::Zero(3);
  CHECK_THROWS_AS(validate(f), InputError);
}
