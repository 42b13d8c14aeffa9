#include "asdca/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "asdca/theory.hpp"

namespace asdca {

std::string_view partition_name(Partition partition) {
  return partition == Partition::Features ? "features" : "examples";
}

void ClusterSpec::validate() const {
  if (nodes == 0) throw std::invalid_argument("ClusterSpec: need at least one node");
  if (dim == 0 || examples == 0) throw std::invalid_argument("ClusterSpec: d and n must be positive");
  if (!(avg_nnz >= 0.0) || avg_nnz > static_cast<double>(dim)) {
    throw std::invalid_argument("ClusterSpec: need 0 <= d_bar <= d");
  }
  if (!(channel_overhead >= 0.0)) throw std::invalid_argument("ClusterSpec: negative channel overhead");
}

double allreduce_cost(double d, std::size_t s) {
  if (s == 0) throw std::invalid_argument("allreduce_cost: s must be >= 1");
  return d * std::log2(static_cast<double>(s));
}

double broadcast_cost(double c, std::size_t s) {
  if (s == 0) throw std::invalid_argument("broadcast_cost: s must be >= 1");
  const double l = std::log2(static_cast<double>(s));
  return c * l * l;
}

double all_broadcast_cost(double c, std::size_t s) {
  return broadcast_cost(c, s) * static_cast<double>(s);
}

CostEstimate iteration_cost(Algorithm algorithm, Partition partition, const ClusterSpec& cluster,
                            std::size_t m) {
  cluster.validate();
  const double s = static_cast<double>(cluster.nodes);
  const double md = static_cast<double>(m);
  CostEstimate est;
  est.algorithm = algorithm;
  est.partition = partition;
  est.batch_size = m;
  if (algorithm == Algorithm::SDCA && partition == Partition::Features) {
    est.batch_size = 1;
    est.runtime_units = cluster.avg_nnz / s;
    est.comm_units = all_broadcast_cost(1.0, cluster.nodes);
    est.speedup_doubtful = est.comm_units >= cluster.avg_nnz && cluster.nodes > 1;
  } else if (algorithm == Algorithm::ASDCA && partition == Partition::Features) {
    est.runtime_units = cluster.avg_nnz * md / s;
    est.comm_units = all_broadcast_cost(md, cluster.nodes);
  } else if (algorithm == Algorithm::ASDCA && partition == Partition::Examples) {
    est.runtime_units = cluster.avg_nnz * md / s;
    est.comm_units = allreduce_cost(static_cast<double>(cluster.dim), cluster.nodes);
  } else if (algorithm == Algorithm::AGD && partition == Partition::Examples) {
    est.batch_size = cluster.examples;
    est.runtime_units = cluster.avg_nnz * static_cast<double>(cluster.examples) / s;
    est.comm_units = allreduce_cost(static_cast<double>(cluster.dim), cluster.nodes);
  } else {
    throw std::invalid_argument("iteration_cost: " + std::string(algorithm_name(algorithm)) +
                                " has no " + std::string(partition_name(partition)) +
                                " partition implementation");
  }
  if (algorithm == Algorithm::ASDCA && (m == 0 || m > cluster.examples)) {
    throw std::invalid_argument("iteration_cost: need 1 <= m <= n");
  }
  est.iterations = 1.0;
  est.total_units = est.runtime_units + est.comm_units + cluster.channel_overhead;
  return est;
}

std::vector<CostEstimate> cost_table(const ClusterSpec& cluster, std::size_t m) {
  return {iteration_cost(Algorithm::SDCA, Partition::Features, cluster),
          iteration_cost(Algorithm::ASDCA, Partition::Features, cluster, m),
          iteration_cost(Algorithm::ASDCA, Partition::Examples, cluster, m),
          iteration_cost(Algorithm::AGD, Partition::Examples, cluster)};
}

std::vector<CostEstimate> recommend(const ClusterSpec& cluster, const RecommendQuery& query) {
  cluster.validate();
  if (!(query.epsilon > 0.0 && query.epsilon < 1.0)) {
    throw std::invalid_argument("recommend: epsilon must lie in (0, 1)");
  }
  if (query.batch_grid.empty()) throw std::invalid_argument("recommend: empty batch grid");
  const std::size_t n = cluster.examples;
  const double gl = query.gamma * query.lambda;
  if (!(gl > 0.0)) throw std::invalid_argument("recommend: gamma and lambda must be positive");
  const double log_factor = std::log(1.0 / query.epsilon);

  auto finish = [&](CostEstimate est, double iterations) {
    est.iterations = iterations * log_factor;
    est.total_units = est.iterations * (est.runtime_units + est.comm_units + cluster.channel_overhead);
    return est;
  };

  std::vector<CostEstimate> rows;
  rows.push_back(finish(iteration_cost(Algorithm::SDCA, Partition::Features, cluster),
                        static_cast<double>(n) + 1.0 / gl));
  for (std::size_t m : query.batch_grid) {
    const auto by_features = iteration_cost(Algorithm::ASDCA, Partition::Features, cluster, m);
    const auto by_examples = iteration_cost(Algorithm::ASDCA, Partition::Examples, cluster, m);
    const auto& cheaper = by_examples.total_units < by_features.total_units ? by_examples : by_features;
    const double theta = compute_theta(query.gamma, query.lambda, n, m);
    rows.push_back(finish(cheaper, static_cast<double>(n) / (static_cast<double>(m) * theta)));
  }
  rows.push_back(finish(iteration_cost(Algorithm::AGD, Partition::Examples, cluster), 1.0 / std::sqrt(gl)));

  std::stable_sort(rows.begin(), rows.end(), [](const CostEstimate& a, const CostEstimate& b) {
    if (a.total_units != b.total_units) return a.total_units < b.total_units;
    return a.batch_size < b.batch_size;
  });
  return rows;
}

void write_cost_csv(std::ostream& out, const std::vector<CostEstimate>& rows) {
  char buf[3][64];
  out << "algorithm,partition,m,runtime,comm,total\n";
  for (const auto& r : rows) {
    std::snprintf(buf[0], sizeof buf[0], "%.17g", r.runtime_units);
    std::snprintf(buf[1], sizeof buf[1], "%.17g", r.comm_units);
    std::snprintf(buf[2], sizeof buf[2], "%.17g", r.total_units);
    out << algorithm_name(r.algorithm) << ',' << partition_name(r.partition) << ',' << r.batch_size
        << ',' << buf[0] << ',' << buf[1] << ',' << buf[2] << '\n';
  }
}

}  // namespace asdca
