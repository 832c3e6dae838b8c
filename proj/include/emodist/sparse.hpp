#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace emodist {

/// Sorted sparse vector: strictly increasing indices below dim(), no stored
/// zeros.
class SparseVector {
 public:
  using Index = std::uint32_t;
  using Entry = std::pair<Index, double>;

  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Sorts, sums duplicate indices and drops zeros. Throws std::out_of_range
  /// for an index >= dim.
  static SparseVector from_pairs(std::size_t dim, std::vector<Entry> entries);
  static SparseVector from_dense(std::span<const double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  double norm() const noexcept;
  double dot(std::span<const double> dense) const noexcept;
  /// Value at an index (0 when absent).
  double at(Index index) const noexcept;
  SparseVector scaled(double factor) const;
  std::vector<double> to_dense() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

/// Places blocks side by side in order; block k starts at the sum of the
/// dimensions of blocks 0..k-1.
SparseVector combine(std::span<const SparseVector> blocks);

}  // namespace emodist
