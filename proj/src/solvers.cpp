#include "asdca/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace asdca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// The lazy primal scale decays by (1 - theta) per step; fold it back into w
// well before it underflows.
constexpr double kMinScale = 1e-100;
// Rounding slack allowed on dual coefficients before they are clamped back
// into the conjugate domain.
constexpr double kFeasibilitySlack = 1e-9;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void require_finite(double primal, double dual, bool dual_expected, std::size_t iteration) {
  if (!std::isfinite(primal) || (dual_expected && !std::isfinite(dual))) {
    throw std::runtime_error("non-finite objective at iteration " + std::to_string(iteration) +
                             " (primal " + std::to_string(primal) + ", dual " +
                             std::to_string(dual) + ")");
  }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::ASDCA: return "asdca";
    case Algorithm::SDCA: return "sdca";
    case Algorithm::AGD: return "agd";
  }
  return "unknown";
}

Algorithm algorithm_from_name(std::string_view name) {
  if (name == "asdca") return Algorithm::ASDCA;
  if (name == "sdca") return Algorithm::SDCA;
  if (name == "agd") return Algorithm::AGD;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected asdca, sdca or agd)");
}

double compute_theta(double gamma, double lambda, std::size_t n, std::size_t m) {
  if (!(gamma > 0.0) || !(lambda > 0.0) || n == 0 || m == 0 || m > n) {
    throw std::invalid_argument("compute_theta: need gamma, lambda > 0 and 1 <= m <= n");
  }
  const double gln = gamma * lambda * static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double bound = std::min({1.0, std::sqrt(gln / md), gln, std::cbrt(gln * gln) / std::cbrt(md)});
  return 0.25 * bound;
}

SubsetSampler::SubsetSampler(std::size_t n, std::size_t m) : perm_(n), m_(m) {
  if (m == 0 || m > n) throw std::invalid_argument("SubsetSampler: need 1 <= m <= n");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  batch_.resize(m);
}

std::span<const std::size_t> SubsetSampler::draw(Rng& rng) {
  const std::size_t n = perm_.size();
  if (m_ == n) {
    std::iota(batch_.begin(), batch_.end(), std::size_t{0});
    return batch_;
  }
  for (std::size_t k = 0; k < m_; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(perm_[k], perm_[pick(rng)]);
  }
  std::copy_n(perm_.begin(), m_, batch_.begin());
  std::sort(batch_.begin(), batch_.end());
  return batch_;
}

std::vector<std::size_t> sample_subset(std::size_t n, std::size_t m, Rng& rng) {
  SubsetSampler sampler(n, m);
  const auto batch = sampler.draw(rng);
  return {batch.begin(), batch.end()};
}

AsdcaIterate::AsdcaIterate(const Problem& problem)
    : problem_(&problem),
      dual_(DualState::zeros(problem)),
      w_(problem.dim(), 0.0) {}

AsdcaIterate::AsdcaIterate(const Problem& problem, std::vector<double> x, DualState dual)
    : problem_(&problem), dual_(std::move(dual)) {
  if (x.size() != problem.dim() || dual_.coeffs.size() != problem.n() ||
      dual_.alpha_bar.size() != problem.dim()) {
    throw std::invalid_argument("AsdcaIterate: state dimensions do not match the problem");
  }
  reset_primal(std::move(x));
}

void AsdcaIterate::reset_primal(std::vector<double> x) {
  w_ = std::move(x);
  scale_ = 1.0;
  coef_ = 0.0;
}

std::vector<double> AsdcaIterate::x() const {
  std::vector<double> out(w_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = scale_ * w_[j] + coef_ * dual_.alpha_bar[j];
  return out;
}

double AsdcaIterate::x_dot(const SparseVector& v) const {
  return scale_ * dot(w_, v) + coef_ * dot(dual_.alpha_bar, v);
}

void AsdcaIterate::step(double theta, std::span<const std::size_t> batch) {
  const auto& data = *problem_->data;
  const auto& loss = problem_->loss;
  const double lambda = problem_->lambda;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  ++counters_.steps;

  // Margins <u, v_i> use the pre-step x and alpha_bar for the whole batch.
  deltas_.assign(batch.size(), 0.0);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const std::size_t i = batch[k];
    const auto& ex = data[i];
    if (ex.features.empty()) continue;
    const double wv = dot(w_, ex.features);
    const double av = dot(dual_.alpha_bar, ex.features);
    counters_.sparse_entries += 2 * ex.features.nnz();
    const double xv = scale_ * wv + coef_ * av;
    const double margin = (1.0 - theta) * xv + (theta / lambda) * av;

    const double old_c = dual_.coeffs[i];
    double new_c = (1.0 - theta) * old_c - theta * loss.derivative(margin, ex.label);
    const auto domain = loss.conjugate_domain(ex.label);
    if (!domain.contains(-new_c, kFeasibilitySlack)) {
      throw std::logic_error("ASDCA step left the dual domain at example " + std::to_string(i));
    }
    new_c = -domain.clamp(-new_c);
    dual_.coeffs[i] = new_c;
    deltas_[k] = (new_c - old_c) * inv_n;
  }

  const double new_coef = (1.0 - theta) * coef_ + theta / lambda;
  const double new_scale = (1.0 - theta) * scale_;

  if (new_scale == 0.0) {
    // theta == 1: x becomes alpha_bar / lambda exactly.
    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (deltas_[k] != 0.0) axpy_sparse(deltas_[k], data[batch[k]].features, dual_.alpha_bar);
      counters_.sparse_entries += data[batch[k]].features.nnz();
    }
    std::fill(w_.begin(), w_.end(), 0.0);
    ++counters_.rescales;
    scale_ = 1.0;
    coef_ = 1.0 / lambda;
    return;
  }

  const double w_factor = (theta / lambda - new_coef) / new_scale;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (deltas_[k] == 0.0) continue;
    const auto& v = data[batch[k]].features;
    axpy_sparse(deltas_[k], v, dual_.alpha_bar);
    axpy_sparse(deltas_[k] * w_factor, v, w_);
    counters_.sparse_entries += 2 * v.nnz();
  }
  scale_ = new_scale;
  coef_ = new_coef;

  if (scale_ < kMinScale) {
    for (auto& w : w_) w *= scale_;
    scale_ = 1.0;
    ++counters_.rescales;
  }
}

double AsdcaIterate::recompute_alpha_bar() {
  auto x_now = x();
  const double drift = asdca::recompute_alpha_bar(*problem_, dual_);
  reset_primal(std::move(x_now));
  return drift;
}

void AsdcaIterate::corrupt_alpha_bar(std::span<const double> offset) {
  auto x_now = x();
  for (std::size_t j = 0; j < offset.size() && j < dual_.alpha_bar.size(); ++j) {
    dual_.alpha_bar[j] += offset[j];
  }
  reset_primal(std::move(x_now));
}

PrimalDual asdca_step(const Problem& problem, double theta, PrimalDual state,
                      std::span<const std::size_t> batch) {
  AsdcaIterate it(problem, std::move(state.x), std::move(state.dual));
  it.step(theta, batch);
  return PrimalDual{it.x(), it.dual()};
}

double sdca_coordinate_maximizer(const ScalarLoss& loss, double coeff, double margin,
                                 double curvature, double label) {
  const double y = label;
  switch (loss.kind()) {
    case LossKind::Squared: {
      const double delta = (y - margin - 0.5 * coeff) / (0.5 + curvature);
      return coeff + delta;
    }
    case LossKind::SmoothedHinge: {
      const double delta = (y - margin - coeff) / (1.0 + curvature);
      const double b = std::clamp(y * (coeff + delta), 0.0, 1.0);
      return y * b;
    }
    case LossKind::Logistic: {
      // Stationarity in t = logit(y c): t + y margin + q (sigmoid(t) - y c) = 0,
      // increasing in t with a root inside [lo, hi].
      const double yc = y * coeff;
      const double q = curvature;
      auto g = [&](double t) { return t + y * margin + q * (sigmoid(t) - yc); };
      double lo = -y * margin - q * (1.0 - yc);
      double hi = -y * margin + q * yc;
      if (lo > hi) std::swap(lo, hi);
      double t = 0.5 * (lo + hi);
      for (int iter = 0; iter < 200; ++iter) {
        const double gt = g(t);
        if (gt == 0.0) break;
        if (gt < 0.0) lo = t; else hi = t;
        const double s = sigmoid(t);
        double next = t - gt / (1.0 + q * s * (1.0 - s));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) {
          t = next;
          break;
        }
        t = next;
      }
      return y * sigmoid(t);
    }
  }
  return coeff;
}

void SolverConfig::validate(std::size_t n) const {
  if (algorithm == Algorithm::ASDCA && (batch_size == 0 || batch_size > n)) {
    throw std::invalid_argument("SolverConfig: batch size must satisfy 1 <= m <= n");
  }
  if (!(gap_tolerance > 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be positive");
  if (theta_override && !(*theta_override > 0.0 && *theta_override <= 1.0)) {
    throw std::invalid_argument("SolverConfig: theta must lie in (0, 1]");
  }
}

SolverTrace run_asdca(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  const std::size_t n = problem.n();
  config.validate(n);
  const std::size_t m = config.batch_size;
  const double theta = config.theta_override.value_or(compute_theta(problem.gamma, problem.lambda, n, m));
  const std::size_t every = config.checkpoint_every ? config.checkpoint_every : ceil_div(n, m);

  SolverTrace trace;
  trace.algorithm = Algorithm::ASDCA;
  trace.batch_size = m;
  trace.theta = theta;

  AsdcaIterate it(problem);
  SubsetSampler sampler(n, m);
  Rng rng(config.seed);
  Stopwatch clock;

  auto checkpoint = [&](std::size_t t) {
    it.recompute_alpha_bar();
    const auto x = it.x();
    TraceRecord rec;
    rec.iteration = t;
    rec.examples_processed = t * m;
    rec.primal = primal_value(problem, x);
    rec.dual = dual_value(problem, it.dual());
    require_finite(rec.primal, rec.dual, true, t);
    rec.gap = rec.primal - rec.dual;
    rec.potential = options.dual_optimum
                        ? static_cast<double>(m) * (rec.primal - *options.dual_optimum) +
                              static_cast<double>(n) * (*options.dual_optimum - rec.dual)
                        : kNaN;
    rec.wall_seconds = clock.seconds();
    trace.records.push_back(rec);
    if (options.observer) options.observer(rec, x);
    return rec.gap <= config.gap_tolerance;
  };

  trace.converged = checkpoint(0);
  for (std::size_t t = 1; t <= config.max_iterations && !trace.converged; ++t) {
    it.step(theta, sampler.draw(rng));
    if (config.recompute_every && t % config.recompute_every == 0) it.recompute_alpha_bar();
    if (t % every == 0 || t == config.max_iterations) trace.converged = checkpoint(t);
  }
  trace.x = it.x();
  trace.dual = it.dual();
  trace.counters = it.counters();
  return trace;
}

SolverTrace run_sdca(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  const auto& data = *problem.data;
  const std::size_t n = problem.n();
  config.validate(n);
  const std::size_t every = config.checkpoint_every ? config.checkpoint_every : n;
  const double lambda = problem.lambda;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Zero examples have a fixed dual term and are never sampled.
  std::vector<std::size_t> active;
  std::vector<double> curvature(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (data[i].features.empty()) continue;
    active.push_back(i);
    curvature[i] = data[i].features.squared_norm() / (lambda * static_cast<double>(n));
  }

  SolverTrace trace;
  trace.algorithm = Algorithm::SDCA;
  trace.batch_size = 1;

  DualState dual = DualState::zeros(problem);
  Rng rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
  Stopwatch clock;
  std::uint64_t sparse_entries = 0;

  auto current_x = [&]() {
    std::vector<double> x(dual.alpha_bar);
    for (auto& v : x) v /= lambda;
    return x;
  };

  auto checkpoint = [&](std::size_t t) {
    recompute_alpha_bar(problem, dual);
    const auto x = current_x();
    TraceRecord rec;
    rec.iteration = t;
    rec.examples_processed = t;
    rec.primal = primal_value(problem, x);
    rec.dual = dual_value(problem, dual);
    require_finite(rec.primal, rec.dual, true, t);
    rec.gap = rec.primal - rec.dual;
    rec.potential = options.dual_optimum
                        ? (rec.primal - *options.dual_optimum) +
                              static_cast<double>(n) * (*options.dual_optimum - rec.dual)
                        : kNaN;
    rec.wall_seconds = clock.seconds();
    trace.records.push_back(rec);
    if (options.observer) options.observer(rec, x);
    return rec.gap <= config.gap_tolerance;
  };

  trace.converged = checkpoint(0);
  for (std::size_t t = 1; t <= config.max_iterations && !trace.converged; ++t) {
    const std::size_t i = active[pick(rng)];
    const auto& ex = data[i];
    const double margin = dot(dual.alpha_bar, ex.features) / lambda;
    const double old_c = dual.coeffs[i];
    const double new_c = sdca_coordinate_maximizer(problem.loss, old_c, margin, curvature[i], ex.label);
    dual.coeffs[i] = new_c;
    if (new_c != old_c) axpy_sparse((new_c - old_c) * inv_n, ex.features, dual.alpha_bar);
    sparse_entries += 2 * ex.features.nnz();
    if (config.recompute_every && t % config.recompute_every == 0) recompute_alpha_bar(problem, dual);
    if (t % every == 0 || t == config.max_iterations) trace.converged = checkpoint(t);
  }
  trace.x = current_x();
  trace.dual = std::move(dual);
  trace.counters.steps = trace.records.back().iteration;
  trace.counters.sparse_entries = sparse_entries;
  return trace;
}

SolverTrace run_agd(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  const std::size_t n = problem.n();
  const std::size_t d = problem.dim();
  config.validate(n);
  const std::size_t every = config.checkpoint_every ? config.checkpoint_every : 1;
  const double lambda = problem.lambda;
  const double smooth = 1.0 / problem.gamma + lambda;
  const double kappa = smooth / lambda;
  const double momentum = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);

  SolverTrace trace;
  trace.algorithm = Algorithm::AGD;
  trace.batch_size = n;

  std::vector<double> x(d, 0.0), x_prev(d, 0.0), y(d, 0.0);
  Stopwatch clock;

  auto checkpoint = [&](std::size_t t) {
    TraceRecord rec;
    rec.iteration = t;
    rec.examples_processed = t * n;
    rec.primal = primal_value(problem, x);
    if (options.dual_optimum) {
      rec.dual = *options.dual_optimum;
      rec.gap = rec.primal - rec.dual;
    } else {
      const auto grad = primal_gradient(problem, x);
      double sq = 0.0;
      for (double g : grad) sq += g * g;
      rec.dual = kNaN;
      rec.gap = sq / (2.0 * lambda);
    }
    require_finite(rec.primal, rec.gap, true, t);
    rec.potential = kNaN;
    rec.wall_seconds = clock.seconds();
    trace.records.push_back(rec);
    if (options.observer) options.observer(rec, x);
    return rec.gap <= config.gap_tolerance;
  };

  trace.converged = checkpoint(0);
  for (std::size_t t = 1; t <= config.max_iterations && !trace.converged; ++t) {
    for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + momentum * (x[j] - x_prev[j]);
    const auto grad = primal_gradient(problem, y);
    x_prev.swap(x);
    for (std::size_t j = 0; j < d; ++j) x[j] = y[j] - grad[j] / smooth;
    if (t % every == 0 || t == config.max_iterations) trace.converged = checkpoint(t);
  }
  trace.x = std::move(x);
  trace.counters.steps = trace.records.back().iteration;
  return trace;
}

SolverTrace run_solver(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  switch (config.algorithm) {
    case Algorithm::ASDCA: return run_asdca(problem, config, options);
    case Algorithm::SDCA: return run_sdca(problem, config, options);
    case Algorithm::AGD: return run_agd(problem, config, options);
  }
  throw std::invalid_argument("run_solver: unknown algorithm");
}

ReferenceSolution solve_reference(const Problem& problem, double gap_tolerance, std::uint64_t seed) {
  SolverConfig config;
  config.algorithm = Algorithm::SDCA;
  config.gap_tolerance = gap_tolerance;
  config.seed = seed;
  config.max_iterations = std::max<std::size_t>(problem.n() * 20000, 1000000);
  auto trace = run_sdca(problem, config);
  if (!trace.converged) {
    throw std::runtime_error("solve_reference: gap " + std::to_string(trace.records.back().gap) +
                             " did not reach the requested tolerance");
  }
  const auto& last = trace.records.back();
  return ReferenceSolution{last.primal, last.dual, std::move(trace.x)};
}

std::size_t batch_from_fraction(double fraction, std::size_t n) {
  if (!(fraction > 0.0) || n == 0) throw std::invalid_argument("batch_from_fraction: need fraction > 0");
  const double raw = std::floor(fraction * static_cast<double>(n) + 0.5);
  if (raw < 1.0) return 1;
  if (raw >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(raw);
}

}  // namespace asdca
