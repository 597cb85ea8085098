#include "distkp/filter.hpp"

#include <cmath>

#include <fmt/format.h>

#include "distkp/errors.hpp"

namespace distkp {

void validate(const NoiseParams& noise) {
  if (!(noise.sigma_omega >= 0.0) || !std::isfinite(noise.sigma_omega)) {
    throw InputError(fmt::format("process noise std must be non-negative, got {}", noise.sigma_omega));
  }
  if (!(noise.sigma_nu > 0.0) || !std::isfinite(noise.sigma_nu)) {
    throw InputError(fmt::format("measurement noise std must be positive, got {}", noise.sigma_nu));
  }
}

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

FilterState init_state(std::size_t dim, double sigma_init) {
  if (!(sigma_init > 0.0)) throw InputError(fmt::format("initial std must be positive, got {}", sigma_init));
  if (dim == 0) throw InputError("filter dimension must be positive");
  const auto n = static_cast<Eigen::Index>(dim);
  return FilterState{Vector::Zero(n), sigma_init * sigma_init * Matrix::Identity(n, n), -1};
}

FilterState predict(const FilterState& state, double sigma_omega, long elapsed) {
  if (elapsed < 0) throw InputError("elapsed steps must be non-negative");
  FilterState out = state;
  out.cov.diagonal().array() += static_cast<double>(elapsed) * sigma_omega * sigma_omega;
  return out;
}

FilterState measurement_update(const FilterState& state, const Vector& phi, double y, double sigma_nu,
                               CovarianceUpdate form) {
  if (phi.size() != state.theta.size()) {
    throw InputError(fmt::format("feature dimension {} does not match state dimension {}", phi.size(),
                                 state.theta.size()));
  }
  if (!phi.allFinite() || !std::isfinite(y) || !state.theta.allFinite() || !state.cov.allFinite()) {
    throw NumericalError("non-finite input to Kalman update");
  }
  const double r = sigma_nu * sigma_nu;
  const Vector p_phi = state.cov * phi;
  const double innovation_var = phi.dot(p_phi) + r;
  const Vector gain = p_phi / innovation_var;

  FilterState out;
  out.t_last = state.t_last;
  out.theta = state.theta + gain * (y - phi.dot(state.theta));
  const auto n = state.theta.size();
  switch (form) {
    case CovarianceUpdate::Standard:
      out.cov = state.cov - gain * p_phi.transpose();
      break;
    case CovarianceUpdate::Joseph: {
      const Matrix a = Matrix::Identity(n, n) - gain * phi.transpose();
      out.cov = a * state.cov * a.transpose() + r * gain * gain.transpose();
      break;
    }
  }
  symmetrize(out.cov);
  if (!out.theta.allFinite() || !out.cov.allFinite()) throw NumericalError("Kalman update produced non-finite values");
  return out;
}

FilterState predict_update(const FilterState& state, const Vector& phi, double y, const NoiseParams& noise,
                           long elapsed, const UpdateOptions& options) {
  validate(noise);
  if (elapsed < 1) throw InputError(fmt::format("elapsed steps must be at least 1, got {}", elapsed));
  const long inflation = options.single_inflation ? 1 : elapsed;
  FilterState out = measurement_update(predict(state, noise.sigma_omega, inflation), phi, y, noise.sigma_nu,
                                       options.form);
  out.t_last = state.t_last + elapsed;
  return out;
}

namespace {

Matrix spd_inverse(const Matrix& m, const char* what) {
  const Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(fmt::format("{} is not positive definite", what));
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  symmetrize(inv);
  return inv;
}

}  // namespace

InfoState to_info(const FilterState& state) {
  InfoState info;
  info.info_mat = spd_inverse(state.cov, "covariance");
  info.info_vec = info.info_mat * state.theta;
  return info;
}

FilterState from_info(const InfoState& info) {
  FilterState state;
  state.cov = spd_inverse(info.info_mat, "information matrix");
  state.theta = state.cov * info.info_vec;
  return state;
}

Vector info_mean(const InfoState& info) {
  const Eigen::LLT<Matrix> llt(info.info_mat);
  if (llt.info() != Eigen::Success) throw NumericalError("information matrix is not positive definite");
  return llt.solve(info.info_vec);
}

FilterState batch_blr(const Matrix& features, const Vector& y, double sigma_nu, double sigma_init) {
  if (!(sigma_nu > 0.0)) throw InputError("batch BLR requires positive measurement noise");
  if (!(sigma_init > 0.0)) throw InputError("batch BLR requires a positive prior std");
  if (features.rows() != y.size()) throw InputError("batch BLR: one measurement per feature row is required");
  const auto e = features.cols();
  const double w = 1.0 / (sigma_nu * sigma_nu);
  Matrix precision = Matrix::Identity(e, e) / (sigma_init * sigma_init);
  precision.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose(), w);
  precision = precision.selfadjointView<Eigen::Lower>();
  FilterState out;
  out.cov = spd_inverse(precision, "BLR precision");
  out.theta = w * out.cov * (features.transpose() * y);
  return out;
}

namespace {

void apply_floor(Matrix& omega, double floor) {
  if (floor <= 0.0) return;
  Matrix shifted = omega;
  shifted.diagonal().array() -= floor;
  if (Eigen::LLT<Matrix>(shifted).info() == Eigen::Success) return;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(omega);
  const Vector clamped = eig.eigenvalues().cwiseMax(floor);
  omega = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  symmetrize(omega);
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError(fmt::format("forgetting factor must lie in (0, 1], got {}", lambda));
}

}  // namespace

InfoState forgetting_decay(const InfoState& info, double lambda, double floor) {
  check_lambda(lambda);
  InfoState out{lambda * info.info_vec, lambda * info.info_mat};
  if (lambda < 1.0) apply_floor(out.info_mat, floor);
  return out;
}

InfoState forgetting_update(const InfoState& info, const Vector& phi, double y, double lambda, double sigma_nu,
                            double floor) {
  check_lambda(lambda);
  if (!(sigma_nu > 0.0)) throw InputError("forgetting update requires positive measurement noise");
  if (phi.size() != info.info_vec.size()) throw InputError("feature dimension does not match information state");
  const double w = 1.0 / (sigma_nu * sigma_nu);
  InfoState out;
  out.info_vec = lambda * info.info_vec + (w * y) * phi;
  out.info_mat = lambda * info.info_mat;
  out.info_mat.noalias() += w * phi * phi.transpose();
  if (lambda < 1.0) apply_floor(out.info_mat, floor);
  return out;
}

FilterState forgetting_update(const FilterState& state, const Vector& phi, double y, double lambda,
                              double sigma_nu) {
  FilterState out = from_info(forgetting_update(to_info(state), phi, y, lambda, sigma_nu));
  out.t_last = state.t_last + 1;
  return out;
}

}  // namespace distkp
