#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "asdca/data.hpp"
#include "asdca/solvers.hpp"

namespace asdca::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kNotConverged = 2 };

/// Entry point shared by the executable and the tests. args excludes the
/// program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "n,d,sparsity,noise,seed[,margin]".
SyntheticSpec parse_synthetic(const std::string& text);

/// Comma-separated reals / counts.
std::vector<double> parse_real_list(const std::string& text);
std::vector<std::size_t> parse_count_list(const std::string& text);

/// Resolves batch-size fractions of n (round half up, clamp to [1, n]),
/// deduplicated and sorted.
std::vector<std::size_t> resolve_batch_sizes(const std::vector<double>& fractions, std::size_t n);

struct TestMetrics {
  double smoothed_hinge = 0.0;
  double zero_one = 0.0;
};

/// Mean smoothed hinge and 0-1 loss of the linear predictor x; features past
/// x.size() are ignored.
TestMetrics evaluate_test_set(const Dataset& test, std::span<const double> x);

/// iteration,examples_processed,primal,dual,gap[,primal_subopt][,test_smoothed_hinge,test_01]
/// with %.17g fields; a NaN dual is written as an empty field.
void write_trace_csv(std::ostream& out, const SolverTrace& trace,
                     std::optional<double> dual_optimum,
                     const std::vector<TestMetrics>* test_metrics);

}  // namespace asdca::cli
