#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "distkp/errors.hpp"
#include "distkp/filter.hpp"
#include "distkp/nystrom.hpp"

using namespace distkp;

namespace {

PointSet random_points(std::size_t n, double lo, double hi, std::uint64_t seed) {
  return sample_representative_points(make_box(2, lo, hi), n, seed);
}

}  // namespace

TEST_CASE("representative points: containment, determinism, spread") {
  const Box unit = make_box(1, 0.0, 1.0);
  const auto one = sample_representative_points(unit, 1, 42);
  CHECK(one.size() == 1);
  CHECK(unit.contains(one.point(0)));

  const Box box = make_box(2, 0.0, 20.0);
  const auto a = sample_representative_points(box, 100, 9);
  const auto b = sample_representative_points(box, 100, 9);
  CHECK(a.coords() == b.coords());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(box.contains(a.point(i)));
  // Uniform on [0,20]: sd 20/sqrt(12); 4 standard errors of the mean of 100 draws.
  const double bound = 20.0 / std::sqrt(12.0 * 100.0) * 4.0;
  CHECK(std::abs(a.coords().col(0).mean() - 10.0) < bound);
  CHECK(std::abs(a.coords().col(1).mean() - 10.0) < bound);

  CHECK_THROWS_AS(sample_representative_points(box, 0, 1), InputError);
}

TEST_CASE("single representative point") {
  const KernelSpec spec{KernelFamily::Laplace, 1.0};
  const PointSet r(Matrix::Constant(1, 2, 3.0));
  const auto basis = build_basis(spec, r);
  CHECK(basis.retained_rank() == 1);
  CHECK(std::abs(basis.eigenvectors()(0, 0)) == doctest::Approx(1.0));
  CHECK(basis.eigenvalues()(0) == doctest::Approx(1.0));
  const Vector phi = feature_map(basis, r.point(0));
  CHECK(phi.size() == 1);
  CHECK(std::abs(phi(0)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("duplicate representative points are truncated") {
  const KernelSpec spec{KernelFamily::Rbf, 1.0};
  PointSet r(2, 2);
  r.row(0) << 1.0, 2.0;
  r.row(1) << 1.0, 2.0;
  const auto basis = build_basis(spec, r);
  CHECK(basis.size() == 2);
  CHECK(basis.retained_rank() == 1);
  CHECK(basis.eigenvalues()(0) == doctest::Approx(2.0));
  CHECK(std::abs(basis.eigenvalues()(1)) < 1e-12);
  CHECK(feature_map(basis, r.point(0)).size() == 1);
}

TEST_CASE("eigendecomposition reconstructs K_RR and agrees with an SVD") {
  const KernelSpec spec{KernelFamily::Rbf, 5.0};
  const auto r = random_points(20, 0.0, 20.0, 5);
  const auto basis = build_basis(spec, r, 0.0);
  const Matrix k = cov_matrix(spec, r, r);
  const Matrix& u = basis.eigenvectors();
  CHECK((u * basis.eigenvalues().asDiagonal() * u.transpose() - k).norm() < 1e-8);

  const auto ru = basis.retained_eigenvectors();
  CHECK((ru.transpose() * ru - Matrix::Identity(ru.cols(), ru.cols())).cwiseAbs().maxCoeff() < 1e-10);
  for (Eigen::Index i = 1; i < basis.eigenvalues().size(); ++i) {
    CHECK(basis.eigenvalues()(i) <= basis.eigenvalues()(i - 1));
  }
  // K_RR is PSD, so its singular values are its eigenvalues.
  const Eigen::JacobiSVD<Matrix> svd(k);
  CHECK((svd.singularValues() - basis.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("feature map reproduces the kernel on representative points") {
  for (auto family : {KernelFamily::Rbf, KernelFamily::Laplace}) {
    const KernelSpec spec{family, 2.0};
    const auto r = random_points(20, 0.0, 10.0, 17);
    const auto basis = build_basis(spec, r, 0.0);
    REQUIRE(basis.retained_rank() == 20);
    const Matrix phi = feature_matrix(basis, r);
    CHECK((phi * phi.transpose() - cov_matrix(spec, r, r)).cwiseAbs().maxCoeff() < 1e-8);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(std::abs(nystrom_kernel(basis, r.point(i), r.point(i)) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("two evaluation routes of the Nyström kernel agree; features are bounded") {
  const KernelSpec spec{KernelFamily::Laplace, 1.5};
  const auto basis = build_basis(spec, random_points(30, 0.0, 10.0, 2));
  const auto probes = random_points(25, -2.0, 12.0, 3);
  const Matrix phi = feature_matrix(basis, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Vector fi = feature_map(basis, probes.point(i));
    CHECK((fi - phi.row(static_cast<Eigen::Index>(i)).transpose()).norm() < 1e-12);
    CHECK(fi.squaredNorm() <= 1.0 + 1e-8);
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const double direct = nystrom_kernel(basis, probes.point(i), probes.point(j));
      CHECK(std::abs(direct - fi.dot(feature_map(basis, probes.point(j)))) < 1e-10);
      CHECK(direct == doctest::Approx(nystrom_kernel(basis, probes.point(j), probes.point(i))).epsilon(1e-12));
    }
  }
  const Matrix gram = phi * phi.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("Nyström kernel vanishes far from the representative set") {
  const KernelSpec spec{KernelFamily::Rbf, 0.5};
  const auto basis = build_basis(spec, random_points(10, 0.0, 1.0, 8));
  Vector far(2);
  far << 50.0, 50.0;
  CHECK(std::abs(nystrom_kernel(basis, far, far)) < 1e-12);
}

TEST_CASE("Nyström posterior equals exact GP with the Nyström kernel and batch BLR") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 6; ++trial) {
    const KernelSpec spec{trial % 2 ? KernelFamily::Rbf : KernelFamily::Laplace, 1.0 + 0.5 * trial};
    const auto basis = build_basis(spec, random_points(12, 0.0, 10.0, 100 + trial));
    const auto x = random_points(40 + 20 * trial, 0.0, 10.0, 200 + trial);
    Vector y(static_cast<Eigen::Index>(x.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    const double s = 0.2;
    const Matrix gram = nystrom_gram(basis, x);
    const Matrix phi = feature_matrix(basis, x);
    const FilterState blr = batch_blr(phi, y, s, 1.0);
    const auto probes = random_points(5, 0.0, 10.0, 300 + trial);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const Vector xs = probes.point(p);
      Vector cross(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) cross(static_cast<Eigen::Index>(i)) = nystrom_kernel(basis, x.point(i), xs);
      const auto exact = gp_posterior_from_gram(gram, cross, nystrom_kernel(basis, xs, xs), y, s);
      const auto approx = nystrom_gp_posterior(basis, x, y, s, xs);
      const Vector f = feature_map(basis, xs);
      CHECK(approx.mean == doctest::Approx(exact.mean).epsilon(1e-6));
      CHECK(approx.variance == doctest::Approx(exact.variance).epsilon(1e-6));
      CHECK(approx.mean == doctest::Approx(f.dot(blr.theta)).epsilon(1e-8));
      CHECK(approx.variance == doctest::Approx(f.dot(blr.cov * f)).epsilon(1e-8));
    }
  }
}

TEST_CASE("Nyström posterior on a subset of R matches the exact GP") {
  const KernelSpec spec{KernelFamily::Rbf, 1.0};
  const auto r = random_points(15, 0.0, 5.0, 61);
  const auto basis = build_basis(spec, r, 0.0);
  const PointSet x(r.coords().topRows(6));
  const Vector y = Vector::LinSpaced(6, -1.0, 1.0);
  const auto probe = random_points(1, 0.0, 5.0, 62).point(0);
  Vector cross(6);
  for (std::size_t i = 0; i < 6; ++i) cross(static_cast<Eigen::Index>(i)) = nystrom_kernel(basis, x.point(i), probe);
  const auto exact = gp_posterior_from_gram(nystrom_gram(basis, x), cross, nystrom_kernel(basis, probe, probe), y, 0.1);
  const auto approx = nystrom_gp_posterior(basis, x, y, 0.1, probe);
  CHECK(std::abs(approx.mean - exact.mean) < 1e-8);
  CHECK(std::abs(approx.variance - exact.variance) < 1e-8);

  const auto zero = nystrom_gp_posterior(basis, x, Vector::Zero(6), 0.1, probe);
  CHECK(zero.mean == 0.0);
}

TEST_CASE("noise-free Nyström system with too few measurements is singular") {
  const KernelSpec spec{KernelFamily::Laplace, 1.0};
  const auto basis = build_basis(spec, random_points(5, 0.0, 5.0, 1));
  const auto x = random_points(2, 0.0, 5.0, 2);
  CHECK_THROWS_AS(nystrom_gp_posterior(basis, x, Vector::Ones(2), 0.0, x.point(0)), NumericalError);
  CHECK_THROWS_AS(feature_map(basis, Vector::Zero(3)), InputError);
}

TEST_CASE("basis dump round-trips") {
  const KernelSpec spec{KernelFamily::Laplace, 2.0};
  const auto basis = build_basis(spec, random_points(8, 0.0, 20.0, 4), 1e-6);
  std::stringstream buf;
  write_basis(buf, basis);
  const auto back = read_basis(buf);
  CHECK(back.kernel().family == spec.family);
  CHECK(back.kernel().lengthscale == spec.lengthscale);
  CHECK(back.rel_threshold() == basis.rel_threshold());
  CHECK(back.retained_rank() == basis.retained_rank());
  CHECK((back.points().coords() - basis.points().coords()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((back.eigenvectors() - basis.eigenvectors()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((back.eigenvalues() - basis.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12);

  std::stringstream bad("distkp-nystrom-basis 1\nkernel cosine 1\n");
  CHECK_THROWS_AS(read_basis(bad), InputError);
}
