#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "asdca/solvers.hpp"

namespace asdca {

/// Asymptotic regime of the complexity tables: n, m and the product
/// gamma * lambda * n. Theta(.) constants are taken to be exactly 1.
struct RegimeParams {
  std::size_t n = 1;
  std::size_t m = 1;
  double gamma_lambda_n = 1.0;

  void validate() const;
  double gamma_lambda() const { return gamma_lambda_n / static_cast<double>(n); }
};

/// max{n/m, sqrt((n/m)/(g l)), (1/m)/(g l), n^(1/3)/(g l m)^(2/3)}, which
/// equals n / (4 m theta) for theta = compute_theta(...).
double dominating_factor(std::size_t n, std::size_t m, double gamma, double lambda);

struct AlgorithmEstimates {
  double sdca = 0.0;
  double asdca = 0.0;
  double agd = 0.0;
};

/// Iteration counts with constants and logs dropped:
/// SDCA n + 1/(l g), ASDCA dominating_factor, AGD 1/sqrt(l g).
AlgorithmEstimates iteration_table(const RegimeParams& regime);

/// iteration_table scaled by the examples each iteration touches (1, m, n).
AlgorithmEstimates examples_processed_table(const RegimeParams& regime);

struct VerificationEntry {
  std::string name;
  bool passed = false;
  bool skipped = false;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct VerificationReport {
  std::vector<VerificationEntry> entries;

  bool all_passed() const;
  void add(VerificationEntry entry) { entries.push_back(std::move(entry)); }
};

/// CSV with header check,measured,bound,tolerance,status,note.
void write_report_csv(std::ostream& out, const VerificationReport& report);

/// Expected one-step dual drift E[delta alpha_bar] against
/// -(theta m / n)(alpha_bar + grad f(u)). Enumerates every size-m subset when
/// n <= 12 (tolerance 1e-12 in the infinity norm); otherwise 1e5 Monte Carlo
/// draws with a 3-standard-error band per coordinate.
VerificationEntry verify_lemma1(const AsdcaIterate& state, double theta, std::size_t m,
                                std::uint64_t seed = 1);

/// E||delta alpha_bar - E delta alpha_bar||^2 against
/// (m theta^2 / n^3) sum_i ||alpha_i + grad phi_i(u)||^2 by enumeration (n <= 12).
VerificationEntry verify_lemma2(const AsdcaIterate& state, double theta, std::size_t m);

struct Theorem1Options {
  std::vector<std::size_t> checkpoints{10, 20, 40};
  std::size_t seeds = 200;
  double slack = 1.2;
  std::uint64_t base_seed = 1000;
};

/// Mean over seeds of m dP(x_t) + n dD(alpha_t) against
/// (1 - theta m / n)^t times its initial value, one entry per checkpoint.
/// When theta exceeds the permitted bound the entries are skipped.
/// Deterministic when m == n (a single run is used).
std::vector<VerificationEntry> verify_theorem1(const Problem& problem, std::size_t m,
                                               std::optional<double> theta, double dual_optimum,
                                               const Theorem1Options& options = {});

/// Closed-form conjugate against max_z (s z - l(z)) on z in [-10, 10] with
/// step 1e-4, over a grid of s spanning the domain (tolerance 2e-4).
VerificationEntry verify_conjugate_oracle(const ScalarLoss& loss);

/// |l*(l'(z)) - (l'(z) z - l(z))| over `samples` points z in [-20, 20]
/// (tolerance 1e-10).
VerificationEntry verify_fenchel_young(const ScalarLoss& loss, std::size_t samples = 10000,
                                       std::uint64_t seed = 7);

/// Grid-search conjugate used by verify_conjugate_oracle.
double conjugate_grid_oracle(const ScalarLoss& loss, double s, double y, double z_lo = -10.0,
                             double z_hi = 10.0, double step = 1e-4);

}  // namespace asdca
