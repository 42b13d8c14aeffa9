#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "asdca/objective.hpp"

namespace asdca {

enum class Algorithm { ASDCA, SDCA, AGD };

std::string_view algorithm_name(Algorithm algorithm);
/// "asdca" | "sdca" | "agd".
Algorithm algorithm_from_name(std::string_view name);

using Rng = std::mt19937_64;

/// Largest step permitted by the ASDCA convergence theorem:
///   (1/4) min{1, sqrt(g l n / m), g l n, (g l n)^(2/3) / m^(1/3)}.
double compute_theta(double gamma, double lambda, std::size_t n, std::size_t m);

/// Uniform size-m subsets of {0..n-1} without replacement by partial
/// Fisher-Yates over a persistent permutation, O(m) per draw. Returned
/// indices are sorted so reductions over the batch run in a fixed order.
class SubsetSampler {
 public:
  SubsetSampler(std::size_t n, std::size_t m);
  std::span<const std::size_t> draw(Rng& rng);
  std::size_t n() const { return perm_.size(); }
  std::size_t m() const { return m_; }

 private:
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> batch_;
  std::size_t m_;
};

std::vector<std::size_t> sample_subset(std::size_t n, std::size_t m, Rng& rng);

/// Work done by AsdcaIterate::step, used to check the per-step cost.
struct StepCounters {
  std::uint64_t steps = 0;
  std::uint64_t sparse_entries = 0;  // sparse-vector entries read or written
  std::uint64_t dense_entries = 0;   // dense d-vector entries touched outside scheduled maintenance
  std::uint64_t rescales = 0;        // O(d) renormalizations of the lazy primal
};

/// ASDCA iterate (x, alpha). The primal is stored lazily as
///   x = scale * w + coef * alpha_bar
/// so one step touches only the supports of the batch examples.
class AsdcaIterate {
 public:
  explicit AsdcaIterate(const Problem& problem);
  AsdcaIterate(const Problem& problem, std::vector<double> x, DualState dual);

  /// One pass of the update: u = (1-theta) x + theta alpha_bar / lambda;
  /// c_i <- (1-theta) c_i - theta l'(<u, v_i>) for i in the batch;
  /// alpha_bar updated incrementally; x <- (1-theta) x + theta alpha_bar / lambda.
  /// Throws std::logic_error if a coefficient leaves the conjugate domain.
  void step(double theta, std::span<const std::size_t> batch);

  std::vector<double> x() const;
  double x_dot(const SparseVector& v) const;
  const DualState& dual() const { return dual_; }
  const Problem& problem() const { return *problem_; }

  /// Exact alpha_bar recomputation keeping x fixed. Returns the drift.
  double recompute_alpha_bar();

  /// Replaces alpha_bar without touching the coefficients or x (test hook
  /// for verifying that the lemma checks detect incoherent states).
  void corrupt_alpha_bar(std::span<const double> offset);

  const StepCounters& counters() const { return counters_; }

 private:
  void reset_primal(std::vector<double> x);

  const Problem* problem_;
  DualState dual_;
  std::vector<double> w_;
  double scale_ = 1.0;
  double coef_ = 0.0;
  StepCounters counters_;
  std::vector<double> margins_;
  std::vector<double> deltas_;
};

/// Convenience wrapper on AsdcaIterate for a dense (x, dual) pair.
struct PrimalDual {
  std::vector<double> x;
  DualState dual;
};
PrimalDual asdca_step(const Problem& problem, double theta, PrimalDual state,
                      std::span<const std::size_t> batch);

/// Exact maximizer over c of the dual restricted to one coordinate,
///   h(c) = -l*(-c, y) - (c - c0) margin - (c - c0)^2 curvature / 2,
/// where margin = <alpha_bar, v>/lambda and curvature = ||v||^2/(lambda n).
double sdca_coordinate_maximizer(const ScalarLoss& loss, double coeff, double margin,
                                 double curvature, double label);

struct SolverConfig {
  Algorithm algorithm = Algorithm::ASDCA;
  std::size_t batch_size = 1;
  std::optional<double> theta_override;
  std::size_t max_iterations = 1000000;
  double gap_tolerance = 1e-6;
  std::uint64_t seed = 0;
  /// Iterations between checkpoints; 0 means one checkpoint per n examples.
  std::size_t checkpoint_every = 0;
  /// Steps between exact alpha_bar recomputations; 0 disables them.
  std::size_t recompute_every = 1000;

  void validate(std::size_t n) const;
};

struct TraceRecord {
  std::size_t iteration = 0;
  std::size_t examples_processed = 0;
  double primal = 0.0;
  double dual = 0.0;      // NaN when the solver carries no dual
  double gap = 0.0;       // certified suboptimality bound
  double potential = 0.0; // m dP + n dD against the reference; NaN without one
  double wall_seconds = 0.0;
};

struct SolverTrace {
  Algorithm algorithm = Algorithm::ASDCA;
  std::size_t batch_size = 1;
  double theta = 0.0;
  bool converged = false;
  std::vector<TraceRecord> records;
  std::vector<double> x;
  std::optional<DualState> dual;
  StepCounters counters;
};

/// Called at every checkpoint with the record and the current primal.
using CheckpointObserver = std::function<void(const TraceRecord&, std::span<const double> x)>;

struct RunOptions {
  /// D(alpha*) from a high-accuracy solve; enables the potential column and
  /// the AGD gap against it.
  std::optional<double> dual_optimum;
  CheckpointObserver observer;
};

SolverTrace run_asdca(const Problem& problem, const SolverConfig& config,
                      const RunOptions& options = {});
SolverTrace run_sdca(const Problem& problem, const SolverConfig& config,
                     const RunOptions& options = {});
/// Constant-momentum Nesterov with step 1/L, L = 1/gamma + lambda, momentum
/// (sqrt(k)-1)/(sqrt(k)+1), k = L/lambda. The gap is P - D* with a reference,
/// otherwise the strong-convexity bound ||grad P||^2 / (2 lambda).
SolverTrace run_agd(const Problem& problem, const SolverConfig& config,
                    const RunOptions& options = {});
SolverTrace run_solver(const Problem& problem, const SolverConfig& config,
                       const RunOptions& options = {});

struct ReferenceSolution {
  double primal = 0.0;
  double dual = 0.0;
  std::vector<double> x;
};

/// SDCA run to the requested gap (default 1e-12); throws if it stalls.
ReferenceSolution solve_reference(const Problem& problem, double gap_tolerance = 1e-12,
                                  std::uint64_t seed = 0x5eed);

/// Rounds a fraction of n half up and clamps to [1, n].
std::size_t batch_from_fraction(double fraction, std::size_t n);

}  // namespace asdca
