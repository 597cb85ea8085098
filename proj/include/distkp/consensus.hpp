#pragma once

#include <vector>

#include "distkp/filter.hpp"
#include "distkp/types.hpp"

namespace distkp {

/// Undirected communication graph: edge (i, j) iff ||x_i - x_j|| <= range, i != j.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(std::vector<std::vector<int>> neighbors, double range = 0.0);

  std::size_t size() const { return neighbors_.size(); }
  double range() const { return range_; }
  const std::vector<int>& neighbors(std::size_t i) const { return neighbors_[i]; }
  std::size_t degree(std::size_t i) const { return neighbors_[i].size(); }
  bool adjacent(std::size_t i, std::size_t j) const;
  std::size_t edge_count() const;

 private:
  std::vector<std::vector<int>> neighbors_;
  double range_ = 0.0;
};

CommGraph build_graph(const PointSet& positions, double range);

bool is_connected(const CommGraph& graph);

enum class ConsensusWeights { Uniform, Metropolis };

using ConsensusPool = std::vector<InfoState>;

/// One synchronous averaging round: every agent reads the previous-round values of
/// itself and its neighbors, then all write.
///   Uniform:    1 / (1 + |N_i|) on self and each neighbor.
///   Metropolis: w_ij = 1 / (1 + max(deg_i, deg_j)), self weight 1 - sum_j w_ij.
ConsensusPool consensus_step(const ConsensusPool& pool, const CommGraph& graph, ConsensusWeights weights);

/// max over pairs of ||L_i - L_j|| + ||Omega_i - Omega_j||_F
double disagreement(const ConsensusPool& pool);

/// (1/n) sum L_i and (1/n) sum Omega_i.
InfoState network_average(const ConsensusPool& pool);

enum class FusionCorrection {
  NetworkSize,  ///< P = n (sum Omega_i)^{-1} = avgOmega^{-1}
  None,         ///< P = (sum Omega_i)^{-1}, i.e. shrunk by 1/n
};

/// Inverse-variance fusion from network averages of the information pair.
FilterState fuse_estimate(const Vector& avg_info_vec, const Matrix& avg_info_mat, std::size_t n,
                          FusionCorrection correction = FusionCorrection::NetworkSize);

/// Scalars sent over one edge per round: L plus the upper triangle of Omega.
std::size_t payload_scalars(std::size_t dim);

namespace serial {
ConsensusPool consensus_step(const ConsensusPool& pool, const CommGraph& graph, ConsensusWeights weights);
}  // namespace serial

}  // namespace distkp
