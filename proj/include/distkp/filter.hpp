#pragma once

#include "distkp/types.hpp"

namespace distkp {

/// Moment form of the coefficient posterior.
struct FilterState {
  Vector theta;
  Matrix cov;
  /// Time index of the last measurement update; -1 before the first one.
  long t_last = -1;

  std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }
};

/// Information form: info_vec = P^{-1} theta, info_mat = P^{-1}.
struct InfoState {
  Vector info_vec;
  Matrix info_mat;

  std::size_t dim() const { return static_cast<std::size_t>(info_vec.size()); }
};

struct NoiseParams {
  double sigma_omega = 0.0;  ///< coefficient random-walk std per time step
  double sigma_nu = 1.0;     ///< measurement noise std
};

void validate(const NoiseParams& noise);

enum class CovarianceUpdate {
  Standard,  ///< (I - K H) P_pred, then symmetrized
  Joseph,    ///< (I - K H) P_pred (I - K H)^T + K s^2 K^T
};

struct UpdateOptions {
  CovarianceUpdate form = CovarianceUpdate::Standard;
  /// Inflate by sigma_omega^2 once per update regardless of elapsed steps.
  bool single_inflation = false;
};

FilterState init_state(std::size_t dim, double sigma_init);

/// Random-walk prediction over `elapsed` steps: P + elapsed * sigma_omega^2 I.
FilterState predict(const FilterState& state, double sigma_omega, long elapsed);

/// Scalar measurement update with H = phi^T.
FilterState measurement_update(const FilterState& state, const Vector& phi, double y, double sigma_nu,
                               CovarianceUpdate form = CovarianceUpdate::Standard);

/// predict over `elapsed` steps followed by the scalar Kalman update; t_last advances by `elapsed`.
FilterState predict_update(const FilterState& state, const Vector& phi, double y, const NoiseParams& noise,
                           long elapsed, const UpdateOptions& options = {});

InfoState to_info(const FilterState& state);
FilterState from_info(const InfoState& info);

/// Mean only, via one Cholesky solve (no explicit inverse).
Vector info_mean(const InfoState& info);

/// Batch Bayesian linear regression posterior under prior N(0, sigma_init^2 I).
/// `features` holds one feature vector per row.
FilterState batch_blr(const Matrix& features, const Vector& y, double sigma_nu, double sigma_init);

inline constexpr double kInfoFloor = 1e-12;

/// Exponential forgetting in information form:
///   Omega <- lambda Omega + phi phi^T / s^2,  L <- lambda L + phi y / s^2,
/// followed by an eigenvalue floor Omega >= floor * I.
InfoState forgetting_update(const InfoState& info, const Vector& phi, double y, double lambda, double sigma_nu,
                            double floor = kInfoFloor);

/// Pure damping step with no measurement (agents that did not sense).
InfoState forgetting_decay(const InfoState& info, double lambda, double floor = kInfoFloor);

FilterState forgetting_update(const FilterState& state, const Vector& phi, double y, double lambda, double sigma_nu);

/// (M + M^T) / 2
void symmetrize(Matrix& m);

}  // namespace distkp
