#include "asdca/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

namespace asdca {

SparseVector::SparseVector(std::vector<std::size_t> indices, std::vector<double> values) {
  if (indices.size() != values.size()) {
    throw std::invalid_argument("SparseVector: indices and values differ in length");
  }
  indices_.reserve(indices.size());
  values_.reserve(values.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw std::invalid_argument("SparseVector: non-finite value");
    }
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw std::invalid_argument("SparseVector: indices must be strictly increasing");
    }
    if (values[k] != 0.0) {
      indices_.push_back(indices[k]);
      values_.push_back(values[k]);
    }
  }
}

SparseVector SparseVector::from_entries(std::vector<std::pair<std::size_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> idx;
  std::vector<double> val;
  idx.reserve(entries.size());
  val.reserve(entries.size());
  for (const auto& [i, v] : entries) {
    idx.push_back(i);
    val.push_back(v);
  }
  return SparseVector(std::move(idx), std::move(val));
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

Dataset::Dataset(std::vector<Example> examples, std::size_t dim)
    : examples_(std::move(examples)) {
  if (examples_.empty()) {
    throw std::invalid_argument("Dataset: at least one example is required");
  }
  std::size_t extent = 0;
  std::size_t total_nnz = 0;
  for (const auto& ex : examples_) {
    if (!std::isfinite(ex.label)) {
      throw std::invalid_argument("Dataset: non-finite label");
    }
    extent = std::max(extent, ex.features.extent());
    total_nnz += ex.features.nnz();
  }
  if (dim == 0) {
    dim_ = extent;
  } else if (extent > dim) {
    throw std::invalid_argument("Dataset: feature index exceeds declared dimension");
  } else {
    dim_ = dim;
  }
  avg_nnz_ = static_cast<double>(total_nnz) / static_cast<double>(examples_.size());
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && !tok.empty();
}

bool parse_index(std::string_view tok, std::size_t& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && !tok.empty();
}

Example parse_line(std::string_view line, std::size_t lineno) {
  auto next_token = [&line]() -> std::string_view {
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    std::size_t e = b;
    while (e < line.size() && !std::isspace(static_cast<unsigned char>(line[e]))) ++e;
    std::string_view tok = line.substr(b, e - b);
    line.remove_prefix(e);
    return tok;
  };

  Example ex;
  std::string_view label_tok = next_token();
  if (!parse_double(label_tok, ex.label) || !std::isfinite(ex.label)) {
    throw ParseError(lineno, "malformed label '" + std::string(label_tok) + "'");
  }

  std::vector<std::pair<std::size_t, double>> entries;
  for (std::string_view tok = next_token(); !tok.empty(); tok = next_token()) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(lineno, "expected <index>:<value>, got '" + std::string(tok) + "'");
    }
    std::size_t index = 0;
    double value = 0.0;
    if (!parse_index(tok.substr(0, colon), index) || index == 0) {
      throw ParseError(lineno, "malformed feature index in '" + std::string(tok) + "'");
    }
    if (!parse_double(tok.substr(colon + 1), value) || !std::isfinite(value)) {
      throw ParseError(lineno, "malformed feature value in '" + std::string(tok) + "'");
    }
    entries.emplace_back(index - 1, value);
  }

  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].first == entries[k - 1].first) {
      throw ParseError(lineno, "duplicate feature index " + std::to_string(entries[k].first + 1));
    }
  }
  ex.features = SparseVector::from_entries(std::move(entries));
  return ex;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  std::vector<Example> examples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    examples.push_back(parse_line(view, lineno));
  }
  if (examples.empty()) {
    throw ParseError(lineno, "no examples in input");
  }
  return Dataset(std::move(examples));
}

Dataset parse_libsvm_string(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  return parse_libsvm(in);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (const auto& ex : data.examples()) {
    std::snprintf(buf, sizeof buf, "%.17g", ex.label);
    out << buf;
    const auto idx = ex.features.indices();
    const auto val = ex.features.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", val[k]);
      out << ' ' << idx[k] + 1 << ':' << buf;
    }
    out << '\n';
  }
}

std::string serialize_libsvm(const Dataset& data) {
  std::ostringstream out;
  write_libsvm(out, data);
  return out.str();
}

void SyntheticSpec::validate() const {
  if (n == 0 || d == 0) throw std::invalid_argument("SyntheticSpec: n and d must be positive");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("SyntheticSpec: sparsity must lie in (0, 1]");
  }
  if (!(label_noise >= 0.0 && label_noise < 0.5)) {
    throw std::invalid_argument("SyntheticSpec: label_noise must lie in [0, 0.5)");
  }
  if (!(margin >= 0.0 && margin < 1.0)) {
    throw std::invalid_argument("SyntheticSpec: margin must lie in [0, 1)");
  }
}

SyntheticDataset generate_synthetic_with_truth(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, spec.d - 1);

  std::vector<double> truth(spec.d);
  double wnorm = 0.0;
  while (wnorm == 0.0) {
    for (auto& w : truth) w = gauss(rng);
    wnorm = std::sqrt(std::inner_product(truth.begin(), truth.end(), truth.begin(), 0.0));
  }
  for (auto& w : truth) w /= wnorm;

  constexpr int kMaxAttempts = 10000;
  std::vector<Example> examples;
  examples.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxAttempts) {
        throw std::runtime_error("generate_synthetic: margin too large to satisfy");
      }
      std::vector<std::size_t> idx;
      std::vector<double> val;
      for (std::size_t j = 0; j < spec.d; ++j) {
        if (spec.sparsity >= 1.0 || unif(rng) < spec.sparsity) {
          idx.push_back(j);
          val.push_back(gauss(rng));
        }
      }
      if (idx.empty()) {
        idx.push_back(pick(rng));
        val.push_back(gauss(rng));
      }
      double norm = 0.0;
      for (double v : val) norm += v * v;
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (auto& v : val) v /= norm;
      SparseVector row(std::move(idx), std::move(val));
      const double score = dot(truth, row);
      if (std::abs(score) < spec.margin || score == 0.0) continue;
      double label = score > 0.0 ? 1.0 : -1.0;
      if (spec.label_noise > 0.0 && unif(rng) < spec.label_noise) label = -label;
      examples.push_back(Example{std::move(row), label});
      break;
    }
  }
  return SyntheticDataset{Dataset(std::move(examples), spec.d), std::move(truth)};
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  return generate_synthetic_with_truth(spec).data;
}

Dataset normalize_rows(const Dataset& data) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (const auto& ex : data.examples()) {
    const double norm = std::sqrt(ex.features.squared_norm());
    if (norm == 0.0) {
      out.push_back(ex);
      continue;
    }
    std::vector<double> val(ex.features.values().begin(), ex.features.values().end());
    for (auto& v : val) v /= norm;
    std::vector<std::size_t> idx(ex.features.indices().begin(), ex.features.indices().end());
    out.push_back(Example{SparseVector(std::move(idx), std::move(val)), ex.label});
  }
  return Dataset(std::move(out), data.dim());
}

double dot(std::span<const double> x, const SparseVector& v) {
  if (v.extent() > x.size()) {
    throw std::out_of_range("dot: sparse index out of range");
  }
  const auto idx = v.indices();
  const auto val = v.values();
  double s = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) s += x[idx[k]] * val[k];
  return s;
}

double dot_truncated(std::span<const double> x, const SparseVector& v) {
  const auto idx = v.indices();
  const auto val = v.values();
  double s = 0.0;
  for (std::size_t k = 0; k < idx.size() && idx[k] < x.size(); ++k) s += x[idx[k]] * val[k];
  return s;
}

void axpy_sparse(double coeff, const SparseVector& v, std::span<double> x) {
  if (v.extent() > x.size()) {
    throw std::out_of_range("axpy_sparse: sparse index out of range");
  }
  const auto idx = v.indices();
  const auto val = v.values();
  for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] += coeff * val[k];
}

}  // namespace asdca
