#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "distkp/consensus.hpp"
#include "distkp/filter.hpp"
#include "distkp/kernel.hpp"
#include "distkp/nystrom.hpp"
#include "distkp/wind_field.hpp"

namespace distkp {

enum class ConnectivityPolicy { Warn, Abort };

struct SimConfig {
  std::size_t agents = 16;
  Box domain = make_box(2, 0.0, 20.0);
  std::size_t features = 100;
  KernelSpec kernel{KernelFamily::Laplace, 2.0};
  double sigma_omega = 0.01;
  double sigma_nu = 0.1;
  double sigma_init = 1.0;
  /// Communication range; 0 selects 1.6 x the initial grid spacing.
  double comm_range = 0.0;
  double u_max = 0.5;
  double step_std = 0.3;
  long sensing_period = 1;
  long steps = 600;
  std::uint64_t seed = 1;
  ConsensusWeights weights = ConsensusWeights::Uniform;
  ConnectivityPolicy connectivity = ConnectivityPolicy::Warn;
  /// Steps at which full agent states and field grids are recorded; values above `steps` are ignored.
  std::vector<long> checkpoints{50, 300, 600};
  std::size_t grid_resolution = 50;
  /// Inflate the covariance once per sensing event instead of once per elapsed step.
  bool alg1_literal = false;
  CovarianceUpdate covariance_form = CovarianceUpdate::Standard;
  double rel_threshold = kDefaultRelThreshold;
  WindLayout wind;
  /// Use the OpenMP kernels; false runs the serial references. Results are identical.
  bool parallel = true;
};

void validate(const SimConfig& config);

/// Range actually used: `comm_range`, or 1.6 x the spacing of the initial placement grid.
double effective_comm_range(const SimConfig& config);

/// Agents evenly spaced on a ceil(sqrt(n)) x ceil(sqrt(n)) grid of cell centers, filled row by row.
PointSet initial_positions(const SimConfig& config);

/// Independent RNG streams derived from the master seed. Agent streams are keyed by agent id,
/// so the realization does not depend on evaluation order or thread count.
enum class Stream : std::uint64_t { RepresentativePoints = 1, Wind = 2, Motion = 3, Noise = 4 };
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

/// Clip u to norm u_max, step, and reflect back into the box.
Vector step_dynamics(const Vector& x, const Vector& u, double u_max, const Box& domain);

/// u ~ N(0, step_std^2 I) in `dim` dimensions.
Vector random_walk_controller(std::mt19937_64& rng, double step_std, std::size_t dim);

/// y = f(x, t) + N(0, sigma_nu^2)
double sample_function(const WindField& field, const Vector& x, double t, double sigma_nu, std::mt19937_64& rng);

struct AgentState {
  std::size_t id = 0;
  Vector position;
  FilterState filter;
  InfoState info;
};

struct FieldEstimate {
  Vector means;
  Vector variances;
};

/// Posterior mean Phi(x)^T theta and variance Phi(x)^T P Phi(x) at each grid point.
FieldEstimate field_estimate(const AgentState& agent, const NystromBasis& basis, const PointSet& grid);
FieldEstimate field_estimate(const FilterState& state, const Matrix& grid_features);

namespace serial {
FieldEstimate field_estimate(const FilterState& state, const Matrix& grid_features);
}  // namespace serial

/// Everything shared by the three runners for one seed: ground truth, basis, evaluation grid.
struct Scenario {
  SimConfig config;
  WindField field;
  NystromBasis basis;
  PointSet grid;
  Matrix grid_features;
  double comm_range = 0.0;
};

Scenario make_scenario(const SimConfig& config);

struct StepMetrics {
  long step = 0;
  double rmse = 0.0;           ///< mean over agents of grid RMSE against truth at `step`
  double disagreement = 0.0;   ///< across agents' information states after consensus
  std::size_t messages = 0;    ///< directed messages sent this step
  bool connected = true;
};

struct Checkpoint {
  long step = 0;
  std::vector<AgentState> agents;
  CommGraph graph;
  Vector truth;
  std::vector<FieldEstimate> fields;
};

struct RunLog {
  std::string method;
  std::size_t feature_dim = 0;
  std::size_t payload_scalars = 0;
  long disconnected_steps = 0;
  std::vector<StepMetrics> metrics;
  std::vector<Checkpoint> checkpoints;
  /// Agent positions and measurements at each step (empty measurement vector when not sensing).
  std::vector<PointSet> positions;
  std::vector<Vector> measurements;
  /// Wall time of the estimation part of each step (sensing + fusion), seconds. Not serialized.
  std::vector<double> step_seconds;

  const Checkpoint* checkpoint(long step) const;
};

RunLog run_distkp(const SimConfig& config);
RunLog run_distkp(const Scenario& scenario);

/// Single Kalman filter ingesting all agents' measurements each sensing step.
RunLog run_centralized_oracle(const SimConfig& config);
RunLog run_centralized_oracle(const Scenario& scenario);

/// Same loop as DistKP with exponential forgetting in place of the random-walk Kalman update.
RunLog run_forgetting_baseline(const SimConfig& config, double lambda);
RunLog run_forgetting_baseline(const Scenario& scenario, double lambda);

/// DistKP with consensus disabled: each agent filters only its own samples.
RunLog run_isolated(const Scenario& scenario);

}  // namespace distkp
