#include "asdca/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace asdca {

void RegimeParams::validate() const {
  if (n == 0 || m == 0 || m > n || !(gamma_lambda_n > 0.0)) {
    throw std::invalid_argument("RegimeParams: need 1 <= m <= n and gamma*lambda*n > 0");
  }
}

double dominating_factor(std::size_t n, std::size_t m, double gamma, double lambda) {
  if (n == 0 || m == 0 || !(gamma > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("dominating_factor: inputs must be positive");
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double gl = gamma * lambda;
  return std::max({nd / md, std::sqrt((nd / md) / gl), (1.0 / md) / gl,
                   std::cbrt(nd) / std::cbrt((gl * md) * (gl * md))});
}

AlgorithmEstimates iteration_table(const RegimeParams& regime) {
  regime.validate();
  const double nd = static_cast<double>(regime.n);
  const double gl = regime.gamma_lambda();
  return AlgorithmEstimates{nd + 1.0 / gl, dominating_factor(regime.n, regime.m, 1.0, gl),
                            1.0 / std::sqrt(gl)};
}

AlgorithmEstimates examples_processed_table(const RegimeParams& regime) {
  const auto it = iteration_table(regime);
  return AlgorithmEstimates{it.sdca, it.asdca * static_cast<double>(regime.m),
                            it.agd * static_cast<double>(regime.n)};
}

bool VerificationReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const VerificationEntry& e) { return e.passed || e.skipped; });
}

void write_report_csv(std::ostream& out, const VerificationReport& report) {
  char buf[3][64];
  out << "check,measured,bound,tolerance,status,note\n";
  for (const auto& e : report.entries) {
    std::snprintf(buf[0], sizeof buf[0], "%.17g", e.measured);
    std::snprintf(buf[1], sizeof buf[1], "%.17g", e.bound);
    std::snprintf(buf[2], sizeof buf[2], "%.17g", e.tolerance);
    const char* status = e.skipped ? "skip" : (e.passed ? "pass" : "fail");
    std::string note = e.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << e.name << ',' << buf[0] << ',' << buf[1] << ',' << buf[2] << ',' << status << ','
        << note << '\n';
  }
}

namespace {

// Calls fn(subset) for every size-m subset of {0..n-1} in lexicographic order.
template <typename Fn>
std::size_t for_each_subset(std::size_t n, std::size_t m, Fn&& fn) {
  std::vector<std::size_t> subset(m);
  for (std::size_t k = 0; k < m; ++k) subset[k] = k;
  std::size_t count = 0;
  while (true) {
    fn(std::span<const std::size_t>(subset));
    ++count;
    std::size_t k = m;
    while (k > 0 && subset[k - 1] == n - m + (k - 1)) --k;
    if (k == 0) break;
    ++subset[k - 1];
    for (std::size_t j = k; j < m; ++j) subset[j] = subset[j - 1] + 1;
  }
  return count;
}

std::vector<double> drift_of_step(const AsdcaIterate& state, double theta,
                                  std::span<const std::size_t> batch) {
  AsdcaIterate next = state;
  next.step(theta, batch);
  const auto& before = state.dual().alpha_bar;
  const auto& after = next.dual().alpha_bar;
  std::vector<double> delta(before.size());
  for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = after[j] - before[j];
  return delta;
}

// u = (1 - theta) x + theta alpha_bar / lambda.
std::vector<double> extrapolated_point(const AsdcaIterate& state, double theta) {
  auto u = state.x();
  const auto& abar = state.dual().alpha_bar;
  const double lambda = state.problem().lambda;
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = (1.0 - theta) * u[j] + theta * abar[j] / lambda;
  return u;
}

std::vector<double> predicted_drift(const AsdcaIterate& state, double theta, std::size_t m) {
  const auto& problem = state.problem();
  const auto u = extrapolated_point(state, theta);
  const auto grad = loss_gradient(problem, u);
  const auto& abar = state.dual().alpha_bar;
  const double scale = -theta * static_cast<double>(m) / static_cast<double>(problem.n());
  std::vector<double> pred(grad.size());
  for (std::size_t j = 0; j < pred.size(); ++j) pred[j] = scale * (abar[j] + grad[j]);
  return pred;
}

constexpr std::size_t kMaxEnumeration = 12;

}  // namespace

VerificationEntry verify_lemma1(const AsdcaIterate& state, double theta, std::size_t m,
                                std::uint64_t seed) {
  const std::size_t n = state.problem().n();
  const std::size_t d = state.problem().dim();
  const auto pred = predicted_drift(state, theta, m);

  VerificationEntry entry;
  entry.name = "lemma1_expected_drift_m" + std::to_string(m);

  if (n <= kMaxEnumeration) {
    std::vector<double> mean(d, 0.0);
    const std::size_t count = for_each_subset(n, m, [&](std::span<const std::size_t> batch) {
      const auto delta = drift_of_step(state, theta, batch);
      for (std::size_t j = 0; j < d; ++j) mean[j] += delta[j];
    });
    double worst = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      worst = std::max(worst, std::abs(mean[j] / static_cast<double>(count) - pred[j]));
    }
    entry.measured = worst;
    entry.bound = 0.0;
    entry.tolerance = 1e-12;
    entry.passed = worst <= entry.tolerance;
    entry.note = "exhaustive over " + std::to_string(count) + " subsets";
    return entry;
  }

  constexpr std::size_t kDraws = 100000;
  std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
  SubsetSampler sampler(n, m);
  Rng rng(seed);
  for (std::size_t k = 0; k < kDraws; ++k) {
    const auto delta = drift_of_step(state, theta, sampler.draw(rng));
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += delta[j];
      sumsq[j] += delta[j] * delta[j];
    }
  }
  double worst_ratio = 0.0;
  const double draws = static_cast<double>(kDraws);
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = sum[j] / draws;
    const double var = std::max(0.0, sumsq[j] / draws - mean * mean);
    const double band = 3.0 * std::sqrt(var / draws) + 1e-12;
    worst_ratio = std::max(worst_ratio, std::abs(mean - pred[j]) / band);
  }
  entry.measured = worst_ratio;
  entry.bound = 1.0;
  entry.tolerance = 0.0;
  entry.passed = worst_ratio <= 1.0;
  entry.note = "monte carlo; measured is deviation over the 3-standard-error band";
  return entry;
}

VerificationEntry verify_lemma2(const AsdcaIterate& state, double theta, std::size_t m) {
  const auto& problem = state.problem();
  const std::size_t n = problem.n();
  const std::size_t d = problem.dim();
  if (n > kMaxEnumeration) {
    throw std::invalid_argument("verify_lemma2: exhaustive check needs n <= 12");
  }

  std::vector<std::vector<double>> deltas;
  for_each_subset(n, m, [&](std::span<const std::size_t> batch) {
    deltas.push_back(drift_of_step(state, theta, batch));
  });
  std::vector<double> mean(d, 0.0);
  for (const auto& delta : deltas) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += delta[j];
  }
  for (auto& v : mean) v /= static_cast<double>(deltas.size());
  double variance = 0.0;
  for (const auto& delta : deltas) {
    for (std::size_t j = 0; j < d; ++j) variance += (delta[j] - mean[j]) * (delta[j] - mean[j]);
  }
  variance /= static_cast<double>(deltas.size());

  const auto u = extrapolated_point(state, theta);
  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = (*problem.data)[i];
    if (ex.features.empty()) continue;
    const double r = state.dual().coeffs[i] + problem.loss.derivative(dot(u, ex.features), ex.label);
    spread += r * r * ex.features.squared_norm();
  }
  const double nd = static_cast<double>(n);
  const double bound = static_cast<double>(m) * theta * theta / (nd * nd * nd) * spread;

  VerificationEntry entry;
  entry.name = "lemma2_variance_bound_m" + std::to_string(m);
  entry.measured = variance;
  entry.bound = bound;
  entry.tolerance = 1e-12;
  entry.passed = variance <= bound + entry.tolerance;
  char buf[64];
  std::snprintf(buf, sizeof buf, "slack %.3e", bound - variance);
  entry.note = buf;
  return entry;
}

std::vector<VerificationEntry> verify_theorem1(const Problem& problem, std::size_t m,
                                               std::optional<double> theta, double dual_optimum,
                                               const Theorem1Options& options) {
  const std::size_t n = problem.n();
  const double limit = compute_theta(problem.gamma, problem.lambda, n, m);
  const double step = theta.value_or(limit);

  std::vector<VerificationEntry> entries;
  auto name_for = [m](std::size_t t) {
    return "theorem1_potential_m" + std::to_string(m) + "_t" + std::to_string(t);
  };

  if (step > limit * (1.0 + 1e-12)) {
    for (std::size_t t : options.checkpoints) {
      VerificationEntry e;
      e.name = name_for(t);
      e.skipped = true;
      e.bound = limit;
      e.measured = step;
      e.note = "theta above the permitted bound; precondition unmet";
      entries.push_back(std::move(e));
    }
    return entries;
  }

  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  auto potential = [&](const AsdcaIterate& it) {
    const auto x = it.x();
    return md * (primal_value(problem, x) - dual_optimum) +
           nd * (dual_optimum - dual_value(problem, it.dual()));
  };

  const AsdcaIterate start(problem);
  const double initial = potential(start);
  const std::size_t horizon =
      options.checkpoints.empty() ? 0 : *std::max_element(options.checkpoints.begin(), options.checkpoints.end());
  const std::size_t runs = (m == n) ? 1 : std::max<std::size_t>(options.seeds, 1);

  std::vector<double> totals(options.checkpoints.size(), 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    AsdcaIterate it(problem);
    SubsetSampler sampler(n, m);
    Rng rng(options.base_seed + r);
    for (std::size_t t = 0; t <= horizon; ++t) {
      if (t > 0) it.step(step, sampler.draw(rng));
      for (std::size_t k = 0; k < options.checkpoints.size(); ++k) {
        if (options.checkpoints[k] == t) totals[k] += potential(it);
      }
    }
  }

  for (std::size_t k = 0; k < options.checkpoints.size(); ++k) {
    const std::size_t t = options.checkpoints[k];
    VerificationEntry e;
    e.name = name_for(t);
    e.measured = totals[k] / static_cast<double>(runs);
    const double decay = std::pow(1.0 - step * md / nd, static_cast<double>(t));
    e.bound = decay * initial * (t == 0 ? 1.0 : options.slack);
    e.tolerance = t == 0 ? 1e-12 * std::max(1.0, std::abs(initial)) : 0.0;
    e.passed = e.measured <= e.bound + e.tolerance;
    e.note = "mean over " + std::to_string(runs) + " runs; theta " + std::to_string(step);
    entries.push_back(std::move(e));
  }
  return entries;
}

double conjugate_grid_oracle(const ScalarLoss& loss, double s, double y, double z_lo, double z_hi,
                             double step) {
  const auto count = static_cast<std::size_t>(std::floor((z_hi - z_lo) / step + 0.5));
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= count; ++k) {
    const double z = z_lo + static_cast<double>(k) * step;
    best = std::max(best, s * z - loss.value(z, y));
  }
  return best;
}

VerificationEntry verify_conjugate_oracle(const ScalarLoss& loss) {
  constexpr int kGrid = 40;
  double worst = 0.0;
  for (double y : {1.0, -1.0}) {
    const auto dom = loss.conjugate_domain(y);
    const double lo = std::isfinite(dom.lower) ? dom.lower : -4.0;
    const double hi = std::isfinite(dom.upper) ? dom.upper : 4.0;
    for (int k = 0; k <= kGrid; ++k) {
      const double s = lo + (hi - lo) * k / kGrid;
      worst = std::max(worst, std::abs(loss.conjugate(s, y) - conjugate_grid_oracle(loss, s, y)));
    }
  }
  VerificationEntry entry;
  entry.name = "conjugate_oracle_" + std::string(loss.name());
  entry.measured = worst;
  entry.bound = 2e-4;
  entry.passed = worst <= entry.bound;
  entry.note = "grid search z in [-10;10] step 1e-4";
  return entry;
}

VerificationEntry verify_fenchel_young(const ScalarLoss& loss, std::size_t samples,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> zdist(-20.0, 20.0);
  std::uniform_real_distribution<double> ydist(-2.0, 2.0);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double z = zdist(rng);
    const double y = loss.is_margin_loss() ? (coin(rng) ? 1.0 : -1.0) : ydist(rng);
    const double g = loss.derivative(z, y);
    worst = std::max(worst, std::abs(loss.conjugate(g, y) - (g * z - loss.value(z, y))));
  }
  VerificationEntry entry;
  entry.name = "fenchel_young_equality_" + std::string(loss.name());
  entry.measured = worst;
  entry.bound = 1e-10;
  entry.passed = worst <= entry.bound;
  entry.note = std::to_string(samples) + " samples";
  return entry;
}

}  // namespace asdca
