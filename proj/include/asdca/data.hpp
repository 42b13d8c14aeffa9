#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace asdca {

/// Sparse real vector with strictly increasing zero-based indices and no
/// stored zeros.
class SparseVector {
 public:
  SparseVector() = default;

  /// Takes sorted (index, value) pairs. Zero values are dropped; unsorted or
  /// duplicate indices and non-finite values throw std::invalid_argument.
  SparseVector(std::vector<std::size_t> indices, std::vector<double> values);

  /// Sorts the entries first. Duplicates still throw.
  static SparseVector from_entries(std::vector<std::pair<std::size_t, double>> entries);

  std::span<const std::size_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }
  std::size_t nnz() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  /// One past the largest stored index, 0 when empty.
  std::size_t extent() const { return indices_.empty() ? 0 : indices_.back() + 1; }

  double squared_norm() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

struct Example {
  SparseVector features;
  double label = 0.0;

  bool operator==(const Example&) const = default;
};

/// Immutable problem instance: n labeled sparse examples in dimension d.
class Dataset {
 public:
  /// dim == 0 infers the dimension from the largest index. Throws if the
  /// dataset is empty, a label is non-finite, or an index exceeds dim.
  explicit Dataset(std::vector<Example> examples, std::size_t dim = 0);

  std::size_t size() const { return examples_.size(); }
  std::size_t dim() const { return dim_; }
  double avg_nnz() const { return avg_nnz_; }

  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const Example> examples() const { return examples_; }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Example> examples_;
  std::size_t dim_ = 0;
  double avg_nnz_ = 0.0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads "<label> <idx>:<val> ..." lines with 1-based indices. Blank lines
/// and '#' comments are skipped.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm_string(const std::string& text);
Dataset load_libsvm(const std::string& path);

/// Writes 1-based libsvm text with %.17g values.
void write_libsvm(std::ostream& out, const Dataset& data);
std::string serialize_libsvm(const Dataset& data);

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t d = 20;
  double sparsity = 1.0;     // fraction of features present per row, in (0, 1]
  double label_noise = 0.0;  // label flip probability, in [0, 0.5)
  double margin = 0.0;       // minimum |<w_true, v>| / ||w_true|| kept
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  Dataset data;
  std::vector<double> truth;  // unit-norm ground-truth hyperplane
};

/// Deterministic given the parameters. Rows are normalized to unit Euclidean norm and
/// always carry at least one nonzero.
SyntheticDataset generate_synthetic_with_truth(const SyntheticSpec& spec);
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Scales every nonempty row to unit Euclidean norm.
Dataset normalize_rows(const Dataset& data);

/// Sum over the support of v. Throws std::out_of_range if v reaches past x.
double dot(std::span<const double> x, const SparseVector& v);

/// Like dot, but entries of v past the end of x count as zero.
double dot_truncated(std::span<const double> x, const SparseVector& v);

/// x[j] += coeff * v[j] on the support of v.
void axpy_sparse(double coeff, const SparseVector& v, std::span<double> x);

}  // namespace asdca
