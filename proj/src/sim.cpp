#include "distkp/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "distkp/errors.hpp"

namespace distkp {

void validate(const SimConfig& c) {
  if (c.agents < 1) throw InputError("agents must be at least 1");
  if (c.steps < 1) throw InputError("steps must be at least 1");
  if (c.sensing_period < 1) throw InputError("sensing_period must be at least 1");
  if (c.features < 1) throw InputError("features must be at least 1");
  if (c.grid_resolution < 1) throw InputError("grid_resolution must be at least 1");
  validate_box(c.domain);
  if (c.domain.dim() != 2) throw InputError("the simulator works on 2-D domains");
  validate(c.kernel);
  validate(NoiseParams{c.sigma_omega, c.sigma_nu});
  if (!(c.sigma_init > 0.0)) throw InputError("sigma_init must be positive");
  if (!(c.comm_range >= 0.0)) throw InputError("comm_range must be non-negative (0 selects the default)");
  if (!(c.u_max >= 0.0)) throw InputError("u_max must be non-negative");
  if (!(c.step_std > 0.0)) throw InputError("step_std must be positive");
  if (!(c.rel_threshold >= 0.0 && c.rel_threshold < 1.0)) throw InputError("rel_threshold must lie in [0, 1)");
}

namespace {

std::size_t grid_side(std::size_t n) {
  auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (side * side < n) ++side;
  return std::max<std::size_t>(side, 1);
}

}  // namespace

double effective_comm_range(const SimConfig& config) {
  if (config.comm_range > 0.0) return config.comm_range;
  const double width = (config.domain.upper - config.domain.lower).minCoeff();
  return 1.6 * width / static_cast<double>(grid_side(config.agents));
}

PointSet initial_positions(const SimConfig& config) {
  const std::size_t side = grid_side(config.agents);
  const Vector step = (config.domain.upper - config.domain.lower) / static_cast<double>(side);
  PointSet positions(config.agents, 2);
  for (std::size_t i = 0; i < config.agents; ++i) {
    const std::size_t ix = i % side;
    const std::size_t iy = i / side;
    positions.row(i)(0) = config.domain.lower(0) + (static_cast<double>(ix) + 0.5) * step(0);
    positions.row(i)(1) = config.domain.lower(1) + (static_cast<double>(iy) + 0.5) * step(1);
  }
  return positions;
}

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
  const auto s = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

namespace {

double reflect(double v, double lo, double hi) {
  const double width = hi - lo;
  double u = std::fmod(v - lo, 2.0 * width);
  if (u < 0.0) u += 2.0 * width;
  if (u > width) u = 2.0 * width - u;
  return lo + u;
}

}  // namespace

Vector step_dynamics(const Vector& x, const Vector& u, double u_max, const Box& domain) {
  if (x.size() != u.size() || static_cast<std::size_t>(x.size()) != domain.dim()) {
    throw InputError("position, control and domain dimensions must agree");
  }
  Vector step = u;
  const double norm = u.norm();
  if (norm > u_max) step *= (norm > 0.0 ? u_max / norm : 0.0);
  Vector next = x + step;
  for (Eigen::Index d = 0; d < next.size(); ++d) next(d) = reflect(next(d), domain.lower(d), domain.upper(d));
  return next;
}

Vector random_walk_controller(std::mt19937_64& rng, double step_std, std::size_t dim) {
  if (!(step_std > 0.0)) throw InputError("random walk step std must be positive");
  std::normal_distribution<double> normal(0.0, step_std);
  Vector u(static_cast<Eigen::Index>(dim));
  for (Eigen::Index d = 0; d < u.size(); ++d) u(d) = normal(rng);
  return u;
}

double sample_function(const WindField& field, const Vector& x, double t, double sigma_nu, std::mt19937_64& rng) {
  if (!(sigma_nu >= 0.0)) throw InputError("measurement noise must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise = normal(rng);
  return wind_eval(field, x, t) + sigma_nu * noise;
}

namespace {

void field_row(const FilterState& state, const Matrix& features, Eigen::Index i, FieldEstimate& out) {
  const auto phi = features.row(i);
  out.means(i) = phi.dot(state.theta);
  out.variances(i) = std::max(0.0, phi.dot(state.cov * phi.transpose()));
}

void check_field_inputs(const FilterState& state, const Matrix& features) {
  if (features.cols() != state.theta.size() || state.cov.rows() != state.theta.size()) {
    throw InputError("grid features do not match the filter dimension");
  }
}

}  // namespace

FieldEstimate field_estimate(const FilterState& state, const Matrix& grid_features) {
  check_field_inputs(state, grid_features);
  const auto rows = grid_features.rows();
  FieldEstimate out{Vector(rows), Vector(rows)};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) field_row(state, grid_features, i, out);
  return out;
}

namespace serial {

FieldEstimate field_estimate(const FilterState& state, const Matrix& grid_features) {
  check_field_inputs(state, grid_features);
  FieldEstimate out{Vector(grid_features.rows()), Vector(grid_features.rows())};
  for (Eigen::Index i = 0; i < grid_features.rows(); ++i) field_row(state, grid_features, i, out);
  return out;
}

}  // namespace serial

FieldEstimate field_estimate(const AgentState& agent, const NystromBasis& basis, const PointSet& grid) {
  return field_estimate(agent.filter, feature_matrix(basis, grid));
}

Scenario make_scenario(const SimConfig& config) {
  validate(config);
  auto rng = make_rng(config.seed, Stream::RepresentativePoints);
  const std::uint64_t repr_seed = rng();
  auto wind_rng = make_rng(config.seed, Stream::Wind);
  const std::uint64_t wind_seed = wind_rng();
  PointSet grid = uniform_grid(config.domain, config.grid_resolution);
  NystromBasis basis =
      build_basis(config.kernel, sample_representative_points(config.domain, config.features, repr_seed),
                  config.rel_threshold);
  Matrix grid_features = config.parallel ? feature_matrix(basis, grid) : serial::feature_matrix(basis, grid);
  return Scenario{config,
                  make_wind_field(config.domain, config.wind, wind_seed),
                  std::move(basis),
                  std::move(grid),
                  std::move(grid_features),
                  effective_comm_range(config)};
}

const Checkpoint* RunLog::checkpoint(long step) const {
  for (const auto& c : checkpoints) {
    if (c.step == step) return &c;
  }
  return nullptr;
}

namespace {

/// Estimation strategy driven by the common world loop.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual void sense(long t, const Matrix& features, const Vector& y) = 0;
  /// One communication round; returns the number of directed messages.
  virtual std::size_t communicate(const CommGraph& graph) = 0;
  virtual std::size_t count() const = 0;
  virtual Vector mean(std::size_t i) const = 0;
  virtual FilterState state(std::size_t i) const = 0;
  virtual InfoState info(std::size_t i) const = 0;
  virtual double spread() const = 0;
};

std::size_t directed_messages(const CommGraph& graph) { return 2 * graph.edge_count(); }

class PoolEstimator : public Estimator {
 public:
  PoolEstimator(const Scenario& s, bool communicate)
      : config_(s.config), exchange_(communicate), last_update_(s.config.agents, 0) {
    const InfoState prior = to_info(init_state(s.basis.retained_rank(), s.config.sigma_init));
    pool_.assign(s.config.agents, prior);
  }

  std::size_t communicate(const CommGraph& graph) override {
    if (!exchange_) return 0;
    pool_ = config_.parallel ? consensus_step(pool_, graph, config_.weights)
                             : serial::consensus_step(pool_, graph, config_.weights);
    return directed_messages(graph);
  }
  std::size_t count() const override { return pool_.size(); }
  Vector mean(std::size_t i) const override { return info_mean(pool_[i]); }
  FilterState state(std::size_t i) const override {
    FilterState s = from_info(pool_[i]);
    s.t_last = last_update_[i];
    return s;
  }
  InfoState info(std::size_t i) const override { return pool_[i]; }
  double spread() const override { return disagreement(pool_); }

 protected:
  SimConfig config_;
  bool exchange_;
  ConsensusPool pool_;
  std::vector<long> last_update_;
};

class DistKpEstimator final : public PoolEstimator {
 public:
  using PoolEstimator::PoolEstimator;

  void sense(long t, const Matrix& features, const Vector& y) override {
    const NoiseParams noise{config_.sigma_omega, config_.sigma_nu};
    const UpdateOptions options{config_.covariance_form, config_.alg1_literal};
    const auto n = static_cast<long>(pool_.size());
#pragma omp parallel for schedule(static) if (config_.parallel)
    for (long k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      FilterState s = from_info(pool_[i]);
      s.t_last = last_update_[i];
      s = predict_update(s, features.row(k).transpose(), y(k), noise, t - last_update_[i], options);
      pool_[i] = to_info(s);
      last_update_[i] = t;
    }
  }
};

/// Forgetting baseline. The pool holds only the damped measurement information
/// (starting from zero); the prior precision sigma_init^-2 I is added back when an
/// estimate is recovered, so stale regions relax toward the prior.
class ForgettingEstimator final : public PoolEstimator {
 public:
  ForgettingEstimator(const Scenario& s, double lambda)
      : PoolEstimator(s, true), lambda_(lambda), prior_precision_(1.0 / (s.config.sigma_init * s.config.sigma_init)) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError(fmt::format("forgetting factor must lie in (0, 1], got {}", lambda));
    const auto e = static_cast<Eigen::Index>(s.basis.retained_rank());
    pool_.assign(s.config.agents, InfoState{Vector::Zero(e), Matrix::Zero(e, e)});
  }

  void sense(long t, const Matrix& features, const Vector& y) override {
    const auto n = static_cast<long>(pool_.size());
#pragma omp parallel for schedule(static) if (config_.parallel)
    for (long k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      pool_[i] = forgetting_update(pool_[i], features.row(k).transpose(), y(k), lambda_, config_.sigma_nu);
      last_update_[i] = t;
    }
  }

  Vector mean(std::size_t i) const override { return info_mean(posterior(i)); }
  FilterState state(std::size_t i) const override {
    FilterState s = from_info(posterior(i));
    s.t_last = last_update_[i];
    return s;
  }
  InfoState info(std::size_t i) const override { return posterior(i); }

 private:
  InfoState posterior(std::size_t i) const {
    InfoState out = pool_[i];
    out.info_mat.diagonal().array() += prior_precision_;
    return out;
  }

  double lambda_;
  double prior_precision_;
};

class OracleEstimator final : public Estimator {
 public:
  explicit OracleEstimator(const Scenario& s)
      : config_(s.config), state_(init_state(s.basis.retained_rank(), s.config.sigma_init)) {
    state_.t_last = 0;
  }

  void sense(long t, const Matrix& features, const Vector& y) override {
    const long elapsed = config_.alg1_literal ? 1 : t - state_.t_last;
    state_ = predict(state_, config_.sigma_omega, elapsed);
    for (Eigen::Index k = 0; k < features.rows(); ++k) {
      state_ = measurement_update(state_, features.row(k).transpose(), y(k), config_.sigma_nu, config_.covariance_form);
    }
    state_.t_last = t;
  }
  std::size_t communicate(const CommGraph&) override { return 0; }
  std::size_t count() const override { return 1; }
  Vector mean(std::size_t) const override { return state_.theta; }
  FilterState state(std::size_t) const override { return state_; }
  InfoState info(std::size_t) const override { return to_info(state_); }
  double spread() const override { return 0.0; }

 private:
  SimConfig config_;
  FilterState state_;
};

bool is_checkpoint(const SimConfig& config, long t) {
  return std::find(config.checkpoints.begin(), config.checkpoints.end(), t) != config.checkpoints.end();
}

RunLog run_loop(const Scenario& scenario, Estimator& estimator, std::string method) {
  const SimConfig& config = scenario.config;
  RunLog log;
  log.method = std::move(method);
  log.feature_dim = scenario.basis.retained_rank();
  log.payload_scalars = payload_scalars(log.feature_dim);

  PointSet positions = initial_positions(config);
  std::vector<std::mt19937_64> motion_rng;
  std::vector<std::mt19937_64> noise_rng;
  for (std::size_t i = 0; i < config.agents; ++i) {
    motion_rng.push_back(make_rng(config.seed, Stream::Motion, i));
    noise_rng.push_back(make_rng(config.seed, Stream::Noise, i));
  }

  for (long t = 1; t <= config.steps; ++t) {
    const CommGraph graph = build_graph(positions, scenario.comm_range);
    const bool connected = is_connected(graph);
    if (!connected) {
      if (config.connectivity == ConnectivityPolicy::Abort) {
        throw ConnectivityError(t, fmt::format("communication graph disconnected at step {}", t));
      }
      ++log.disconnected_steps;
    }

    const bool sensing = (t - 1) % config.sensing_period == 0;
    Vector y;
    if (sensing) {
      y.resize(static_cast<Eigen::Index>(config.agents));
      for (std::size_t i = 0; i < config.agents; ++i) {
        y(static_cast<Eigen::Index>(i)) = sample_function(scenario.field, positions.point(i), static_cast<double>(t),
                                                          config.sigma_nu, noise_rng[i]);
      }
    }
    log.positions.push_back(positions);
    log.measurements.push_back(y);

    const auto start = std::chrono::steady_clock::now();
    if (sensing) {
      const Matrix features = config.parallel ? feature_matrix(scenario.basis, positions)
                                              : serial::feature_matrix(scenario.basis, positions);
      estimator.sense(t, features, y);
    }
    const std::size_t messages = estimator.communicate(graph);
    log.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    const Vector truth = wind_grid(scenario.field, scenario.grid, static_cast<double>(t));
    const auto count = static_cast<long>(estimator.count());
    std::vector<double> rmse(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static) if (config.parallel)
    for (long i = 0; i < count; ++i) {
      const Vector err = scenario.grid_features * estimator.mean(static_cast<std::size_t>(i)) - truth;
      rmse[static_cast<std::size_t>(i)] = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
    }
    double mean_rmse = 0.0;
    for (double r : rmse) mean_rmse += r;
    mean_rmse /= static_cast<double>(count);
    log.metrics.push_back(StepMetrics{t, mean_rmse, estimator.spread(), messages, connected});

    if (is_checkpoint(config, t)) {
      Checkpoint cp;
      cp.step = t;
      cp.graph = graph;
      cp.truth = truth;
      for (std::size_t i = 0; i < estimator.count(); ++i) {
        AgentState agent;
        agent.id = i;
        agent.position = positions.point(std::min(i, positions.size() - 1));
        agent.filter = estimator.state(i);
        agent.info = estimator.info(i);
        cp.fields.push_back(config.parallel ? field_estimate(agent.filter, scenario.grid_features)
                                            : serial::field_estimate(agent.filter, scenario.grid_features));
        cp.agents.push_back(std::move(agent));
      }
      log.checkpoints.push_back(std::move(cp));
    }

    for (std::size_t i = 0; i < config.agents; ++i) {
      const Vector u = random_walk_controller(motion_rng[i], config.step_std, 2);
      positions.row(i) = step_dynamics(positions.point(i), u, config.u_max, config.domain).transpose();
    }
  }
  return log;
}

}  // namespace

RunLog run_distkp(const Scenario& scenario) {
  DistKpEstimator estimator(scenario, true);
  return run_loop(scenario, estimator, "distkp");
}

RunLog run_distkp(const SimConfig& config) { return run_distkp(make_scenario(config)); }

RunLog run_isolated(const Scenario& scenario) {
  DistKpEstimator estimator(scenario, false);
  return run_loop(scenario, estimator, "isolated");
}

RunLog run_centralized_oracle(const Scenario& scenario) {
  OracleEstimator estimator(scenario);
  return run_loop(scenario, estimator, "oracle");
}

RunLog run_centralized_oracle(const SimConfig& config) { return run_centralized_oracle(make_scenario(config)); }

RunLog run_forgetting_baseline(const Scenario& scenario, double lambda) {
  ForgettingEstimator estimator(scenario, lambda);
  return run_loop(scenario, estimator, "baseline");
}

RunLog run_forgetting_baseline(const SimConfig& config, double lambda) {
  return run_forgetting_baseline(make_scenario(config), lambda);
}

}  // namespace distkp
