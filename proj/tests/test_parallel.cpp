#include <doctest.h>

#include <omp.h>

#include <random>

#include "distkp/consensus.hpp"
#include "distkp/kernel.hpp"
#include "distkp/nystrom.hpp"
#include "distkp/sim.hpp"

using namespace distkp;

namespace {

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("parallel kernels match their serial references exactly") {
  Threads threads(4);
  const Box box = make_box(2, 0.0, 20.0);
  const auto pts = sample_representative_points(box, 157, 3);
  const auto other = sample_representative_points(box, 61, 4);
  for (const auto family : {KernelFamily::Rbf, KernelFamily::Laplace}) {
    const KernelSpec spec{family, 2.0};
    CHECK(cov_matrix(spec, pts, other) == serial::cov_matrix(spec, pts, other));
    const auto basis = build_basis(spec, other);
    CHECK(feature_matrix(basis, pts) == serial::feature_matrix(basis, pts));

    const FilterState s{Vector::LinSpaced(static_cast<Eigen::Index>(basis.retained_rank()), -1.0, 1.0),
                        Matrix::Identity(static_cast<Eigen::Index>(basis.retained_rank()),
                                         static_cast<Eigen::Index>(basis.retained_rank())),
                        -1};
    const Matrix features = feature_matrix(basis, pts);
    const auto a = field_estimate(s, features);
    const auto b = serial::field_estimate(s, features);
    CHECK(a.means == b.means);
    CHECK(a.variances == b.variances);
  }

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  ConsensusPool pool;
  for (int i = 0; i < 25; ++i) {
    Matrix m(6, 6);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
    Vector l(6);
    for (auto& v : l) v = normal(rng);
    pool.push_back(InfoState{l, m * m.transpose()});
  }
  const auto graph = build_graph(sample_representative_points(box, 25, 9), 6.0);
  for (const auto w : {ConsensusWeights::Uniform, ConsensusWeights::Metropolis}) {
    const auto p = consensus_step(pool, graph, w);
    const auto q = serial::consensus_step(pool, graph, w);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      CHECK(p[i].info_vec == q[i].info_vec);
      CHECK(p[i].info_mat == q[i].info_mat);
    }
  }
}

TEST_CASE("a serial run reproduces the parallel run bit for bit") {
  Threads threads(4);
  SimConfig c;
  c.steps = 60;
  c.features = 40;
  c.grid_resolution = 20;
  c.checkpoints = {30, 60};
  const RunLog par = run_distkp(c);
  c.parallel = false;
  const RunLog ser = run_distkp(c);
  REQUIRE(par.metrics.size() == ser.metrics.size());
  for (std::size_t k = 0; k < par.metrics.size(); ++k) {
    CHECK(par.metrics[k].rmse == ser.metrics[k].rmse);
    CHECK(par.metrics[k].disagreement == ser.metrics[k].disagreement);
  }
  for (std::size_t k = 0; k < par.checkpoints.size(); ++k) {
    for (std::size_t i = 0; i < c.agents; ++i) {
      CHECK(par.checkpoints[k].fields[i].means == ser.checkpoints[k].fields[i].means);
      CHECK(par.checkpoints[k].agents[i].info.info_mat == ser.checkpoints[k].agents[i].info.info_mat);
    }
  }
}
