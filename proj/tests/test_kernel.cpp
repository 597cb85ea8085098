#include <doctest.h>

#include <cmath>
#include <random>

#include "distkp/errors.hpp"
#include "distkp/kernel.hpp"

using namespace distkp;

namespace {

PointSet random_points(std::size_t n, std::size_t dim, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  PointSet p(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) p.row(i)(static_cast<Eigen::Index>(d)) = u(rng);
  return p;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("kernel values at hand-computed distances") {
  const KernelSpec rbf{KernelFamily::Rbf, 1.0};
  const KernelSpec lap{KernelFamily::Laplace, 2.0};
  CHECK(eval_kernel(rbf, vec({0.3, -1.0}), vec({0.3, -1.0})) == 1.0);
  CHECK(eval_kernel(rbf, vec({0.0, 0.0}), vec({1.0, 1.0})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(eval_kernel(lap, vec({0.0, 0.0}), vec({2.0, 0.0})) == doctest::Approx(0.3678794).epsilon(1e-7));
  CHECK_THROWS_AS(eval_kernel(rbf, vec({0.0}), vec({0.0, 1.0})), InputError);
  CHECK_THROWS_AS(validate(KernelSpec{KernelFamily::Rbf, 0.0}), InputError);
}

TEST_CASE("kernel is symmetric, normalized and bounded") {
  const auto pts = random_points(30, 3, -5.0, 5.0, 7);
  for (auto family : {KernelFamily::Rbf, KernelFamily::Laplace}) {
    const KernelSpec spec{family, 1.7};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(eval_kernel(spec, pts.point(i), pts.point(i)) == 1.0);
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const double k = eval_kernel(spec, pts.point(i), pts.point(j));
        CHECK(k == eval_kernel(spec, pts.point(j), pts.point(i)));
        CHECK(k > 0.0);
        CHECK(k <= 1.0);
      }
    }
  }
}

TEST_CASE("covariance matrix layout and PSD") {
  const KernelSpec spec{KernelFamily::Rbf, 0.8};
  const PointSet single(Matrix::Constant(1, 2, 0.5));
  CHECK(cov_matrix(spec, single, single)(0, 0) == 1.0);

  PointSet ab(2, 2);
  ab.row(0) << 0.0, 0.0;
  ab.row(1) << 1.0, 0.5;
  const Matrix col = cov_matrix(spec, ab, PointSet(ab.coords().topRows(1)));
  CHECK(col.rows() == 2);
  CHECK(col.cols() == 1);
  CHECK(col(0, 0) == 1.0);
  CHECK(col(1, 0) == eval_kernel(spec, ab.point(1), ab.point(0)));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (auto family : {KernelFamily::Rbf, KernelFamily::Laplace}) {
      const auto pts = random_points(50, 2, 0.0, 3.0, seed);
      const Matrix k = cov_matrix(KernelSpec{family, 0.7}, pts, pts);
      CHECK((k - k.transpose()).norm() == 0.0);
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
  }
  CHECK_THROWS_AS(cov_matrix(spec, PointSet(), ab), InputError);
  CHECK_THROWS_AS(cov_matrix(spec, ab, PointSet(Matrix::Zero(1, 3))), InputError);
}

TEST_CASE("gp posterior scalar cases") {
  const KernelSpec spec{KernelFamily::Laplace, 1.0};
  const PointSet x(Matrix::Constant(1, 2, 0.25));
  const Vector xs = x.point(0);

  const auto zero = gp_posterior(spec, x, Vector::Zero(1), 0.3, xs);
  CHECK(zero.mean == 0.0);

  const auto one = gp_posterior(spec, x, Vector::Ones(1), 1.0, xs);
  CHECK(one.mean == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.variance == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("gp posterior matches an independent dense solve") {
  const KernelSpec spec{KernelFamily::Rbf, 0.5};
  const auto X = random_points(5, 2, 0.0, 1.0, 11);
  const Vector y = Vector::LinSpaced(5, -1.0, 1.0);
  const double s = 0.1;
  const Vector xs = random_points(1, 2, 0.0, 1.0, 12).point(0);

  // Oracle: explicit entries + full-pivot LU, no Cholesky.
  Matrix k(5, 5);
  Vector kx(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) k(i, j) = std::exp(-(X.point(i) - X.point(j)).squaredNorm() / (2 * 0.25));
    kx(i) = std::exp(-(X.point(i) - xs).squaredNorm() / (2 * 0.25));
  }
  const Eigen::FullPivLU<Matrix> lu(k + s * s * Matrix::Identity(5, 5));
  const double mean = kx.dot(lu.solve(y));
  const double var = 1.0 - kx.dot(lu.solve(kx));

  const auto post = gp_posterior(spec, X, y, s, xs);
  CHECK(post.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(post.variance == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("gp posterior interpolates as noise vanishes and never exceeds the prior") {
  const KernelSpec spec{KernelFamily::Rbf, 0.5};
  const auto X = random_points(5, 2, 0.0, 1.0, 3);
  const Vector y = Vector::LinSpaced(5, 0.2, -0.7);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const auto post = gp_posterior(spec, X, y, 1e-8, X.point(i));
    CHECK(std::abs(post.mean - y(static_cast<Eigen::Index>(i))) < 1e-6);
  }
  const auto probes = random_points(40, 2, -1.0, 2.0, 4);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto post = gp_posterior(spec, X, y, 0.05, probes.point(i));
    CHECK(post.variance >= 0.0);
    CHECK(post.variance <= 1.0 + 1e-10);
  }
}

TEST_CASE("gp posterior reports singular systems") {
  const KernelSpec spec{KernelFamily::Rbf, 1.0};
  Matrix gram = Matrix::Ones(2, 2);
  gram(0, 1) = gram(1, 0) = 2.0;  // indefinite
  CHECK_THROWS_AS(gp_posterior_from_gram(gram, Vector::Ones(2), 1.0, Vector::Ones(2), 0.0), NumericalError);
  CHECK_THROWS_AS(gp_posterior(spec, PointSet(Matrix::Zero(2, 1)), Vector::Ones(3), 0.1, Vector::Zero(1)), InputError);
}

TEST_CASE("tiny negative variance is clamped, larger ones are errors") {
  // Quadratic form is exactly 1 with no jitter; k_ss sits just below or well below it.
  const Matrix gram = Matrix::Identity(1, 1);
  const Vector cross = Vector::Ones(1);
  const GpOptions no_jitter{0.0, 1e-10};
  const auto clamped = gp_posterior_from_gram(gram, cross, 1.0 - 5e-11, Vector::Zero(1), 0.0, no_jitter);
  CHECK(clamped.variance == 0.0);
  CHECK_THROWS_AS(gp_posterior_from_gram(gram, cross, 0.9, Vector::Zero(1), 0.0, no_jitter), NumericalError);
}
