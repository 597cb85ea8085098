#include "distkp/consensus.hpp"

#include <algorithm>
#include <queue>

#include <fmt/format.h>

#include "distkp/errors.hpp"

namespace distkp {

CommGraph::CommGraph(std::vector<std::vector<int>> neighbors, double range)
    : neighbors_(std::move(neighbors)), range_(range) {
  const auto n = static_cast<int>(neighbors_.size());
  for (int i = 0; i < n; ++i) {
    auto& row = neighbors_[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end());
    for (int j : row) {
      if (j < 0 || j >= n || j == i) throw InputError(fmt::format("invalid neighbor {} of agent {}", j, i));
    }
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw InputError(fmt::format("agent {} lists a neighbor twice", i));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j : neighbors_[static_cast<std::size_t>(i)]) {
      if (!adjacent(static_cast<std::size_t>(j), static_cast<std::size_t>(i))) {
        throw InputError(fmt::format("adjacency is not symmetric between {} and {}", i, j));
      }
    }
  }
}

bool CommGraph::adjacent(std::size_t i, std::size_t j) const {
  const auto& row = neighbors_[i];
  return std::binary_search(row.begin(), row.end(), static_cast<int>(j));
}

std::size_t CommGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& row : neighbors_) total += row.size();
  return total / 2;
}

CommGraph build_graph(const PointSet& positions, double range) {
  if (!(range > 0.0)) throw InputError(fmt::format("communication range must be positive, got {}", range));
  const std::size_t n = positions.size();
  std::vector<std::vector<int>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (positions.row(i) - positions.row(j)).norm() <= range) {
        neighbors[i].push_back(static_cast<int>(j));
      }
    }
  }
  return CommGraph(std::move(neighbors), range);
}

bool is_connected(const CommGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) throw InputError("connectivity of an empty graph is undefined");
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (int j : graph.neighbors(i)) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++reached;
        frontier.push(static_cast<std::size_t>(j));
      }
    }
  }
  return reached == n;
}

namespace {

void check_pool(const ConsensusPool& pool, const CommGraph& graph) {
  if (pool.size() != graph.size()) {
    throw InputError(fmt::format("pool has {} agents but graph has {}", pool.size(), graph.size()));
  }
  for (const auto& s : pool) {
    if (s.dim() != pool.front().dim() || s.info_mat.rows() != s.info_vec.size() ||
        s.info_mat.cols() != s.info_vec.size()) {
      throw InputError("consensus pool states disagree in dimension");
    }
  }
}

// Output of agent i for one round; shared by the serial and parallel paths.
InfoState mix_agent(const ConsensusPool& pool, const CommGraph& graph, ConsensusWeights weights, std::size_t i) {
  const auto& nbrs = graph.neighbors(i);
  if (nbrs.empty()) return pool[i];
  InfoState out;
  switch (weights) {
    case ConsensusWeights::Uniform: {
      const double w = 1.0 / (1.0 + static_cast<double>(nbrs.size()));
      out.info_vec = pool[i].info_vec;
      out.info_mat = pool[i].info_mat;
      for (int j : nbrs) {
        out.info_vec += pool[static_cast<std::size_t>(j)].info_vec;
        out.info_mat += pool[static_cast<std::size_t>(j)].info_mat;
      }
      out.info_vec *= w;
      out.info_mat *= w;
      break;
    }
    case ConsensusWeights::Metropolis: {
      double self = 1.0;
      out.info_vec = Vector::Zero(pool[i].info_vec.size());
      out.info_mat = Matrix::Zero(pool[i].info_mat.rows(), pool[i].info_mat.cols());
      for (int j : nbrs) {
        const auto ju = static_cast<std::size_t>(j);
        const double w = 1.0 / (1.0 + static_cast<double>(std::max(nbrs.size(), graph.degree(ju))));
        self -= w;
        out.info_vec += w * pool[ju].info_vec;
        out.info_mat += w * pool[ju].info_mat;
      }
      out.info_vec += self * pool[i].info_vec;
      out.info_mat += self * pool[i].info_mat;
      break;
    }
  }
  return out;
}

}  // namespace

ConsensusPool consensus_step(const ConsensusPool& pool, const CommGraph& graph, ConsensusWeights weights) {
  check_pool(pool, graph);
  ConsensusPool next(pool.size());
  const auto n = static_cast<long>(pool.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    next[static_cast<std::size_t>(i)] = mix_agent(pool, graph, weights, static_cast<std::size_t>(i));
  }
  return next;
}

namespace serial {

ConsensusPool consensus_step(const ConsensusPool& pool, const CommGraph& graph, ConsensusWeights weights) {
  check_pool(pool, graph);
  ConsensusPool next;
  next.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) next.push_back(mix_agent(pool, graph, weights, i));
  return next;
}

}  // namespace serial

double disagreement(const ConsensusPool& pool) {
  if (pool.empty()) throw InputError("disagreement of an empty pool is undefined");
  double worst = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const double d = (pool[i].info_vec - pool[j].info_vec).norm() + (pool[i].info_mat - pool[j].info_mat).norm();
      worst = std::max(worst, d);
    }
  }
  return worst;
}

InfoState network_average(const ConsensusPool& pool) {
  if (pool.empty()) throw InputError("average of an empty pool is undefined");
  InfoState avg{Vector::Zero(pool.front().info_vec.size()),
                Matrix::Zero(pool.front().info_mat.rows(), pool.front().info_mat.cols())};
  for (const auto& s : pool) {
    avg.info_vec += s.info_vec;
    avg.info_mat += s.info_mat;
  }
  const double inv_n = 1.0 / static_cast<double>(pool.size());
  avg.info_vec *= inv_n;
  avg.info_mat *= inv_n;
  return avg;
}

FilterState fuse_estimate(const Vector& avg_info_vec, const Matrix& avg_info_mat, std::size_t n,
                          FusionCorrection correction) {
  if (n == 0) throw InputError("network size must be positive");
  if (avg_info_mat.rows() != avg_info_vec.size() || avg_info_mat.cols() != avg_info_vec.size()) {
    throw InputError("fusion inputs disagree in dimension");
  }
  FilterState fused = from_info(InfoState{avg_info_vec, avg_info_mat});
  if (correction == FusionCorrection::None) fused.cov /= static_cast<double>(n);
  return fused;
}

std::size_t payload_scalars(std::size_t dim) { return dim + dim * (dim + 1) / 2; }

}  // namespace distkp
