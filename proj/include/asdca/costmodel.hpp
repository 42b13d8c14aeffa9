#pragma once

#include <cstddef>
#include <ostream>
#include <string_view>
#include <vector>

#include "asdca/solvers.hpp"

namespace asdca {

// Per-iteration cost accounting for s parallel nodes. All bounds use base-2
// logarithms and unit constants.

enum class Partition { Features, Examples };

std::string_view partition_name(Partition partition);

struct ClusterSpec {
  std::size_t nodes = 1;          // s
  std::size_t dim = 1;            // d
  double avg_nnz = 1.0;           // d_bar
  std::size_t examples = 1;       // n
  double channel_overhead = 0.0;  // cost of opening channels, per iteration

  void validate() const;
};

struct CostEstimate {
  Algorithm algorithm = Algorithm::SDCA;
  Partition partition = Partition::Features;
  std::size_t batch_size = 1;
  double runtime_units = 0.0;
  double comm_units = 0.0;
  /// Set on SDCA/features estimates when s log^2 s >= d_bar, i.e. splitting
  /// features buys no speed-up.
  bool speedup_doubtful = false;
  /// Iterations times (runtime + comm + channel overhead); filled by recommend.
  double total_units = 0.0;
  double iterations = 0.0;
};

/// Tree summation of s d-vectors: d log2 s.
double allreduce_cost(double d, std::size_t s);
/// Hypercube broadcast of c bits from one node: c log2^2 s.
double broadcast_cost(double c, std::size_t s);
/// Every node broadcasting c bits: c s log2^2 s.
double all_broadcast_cost(double c, std::size_t s);

/// Supported pairs: SDCA/features, ASDCA/features, ASDCA/examples,
/// AGD/examples. Others throw std::invalid_argument.
CostEstimate iteration_cost(Algorithm algorithm, Partition partition, const ClusterSpec& cluster,
                            std::size_t m = 1);

/// The four supported rows at batch size m.
std::vector<CostEstimate> cost_table(const ClusterSpec& cluster, std::size_t m);

struct RecommendQuery {
  double gamma = 1.0;
  double lambda = 1.0;
  double epsilon = 1e-3;
  std::vector<std::size_t> batch_grid{1};
};

/// Ranks SDCA, AGD and ASDCA at every m in the grid by total cost, best
/// first. Iteration counts carry a log(1/epsilon) factor: SDCA
/// (n + 1/(l g)), ASDCA n/(m theta), AGD 1/sqrt(l g). ASDCA uses whichever
/// partition is cheaper per iteration. Ties go to the smaller m.
std::vector<CostEstimate> recommend(const ClusterSpec& cluster, const RecommendQuery& query);

/// CSV with header algorithm,partition,m,runtime,comm,total.
void write_cost_csv(std::ostream& out, const std::vector<CostEstimate>& rows);

}  // namespace asdca
