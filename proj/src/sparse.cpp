#include "emodist/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace emodist {

SparseVector SparseVector::from_pairs(std::size_t dim, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector v(dim);
  v.entries_.reserve(entries.size());
  for (const auto& [index, value] : entries) {
    if (index >= dim) {
      throw std::out_of_range("sparse index " + std::to_string(index) + " >= dim " + std::to_string(dim));
    }
    if (!v.entries_.empty() && v.entries_.back().first == index) {
      v.entries_.back().second += value;
    } else {
      v.entries_.emplace_back(index, value);
    }
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
  return v;
}

SparseVector SparseVector::from_dense(std::span<const double> values) {
  SparseVector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) v.entries_.emplace_back(static_cast<Index>(i), values[i]);
  }
  return v;
}

double SparseVector::norm() const noexcept {
  double sum = 0.0;
  for (const auto& [_, value] : entries_) sum += value * value;
  return std::sqrt(sum);
}

double SparseVector::dot(std::span<const double> dense) const noexcept {
  double sum = 0.0;
  for (const auto& [index, value] : entries_) sum += value * dense[index];
  return sum;
}

double SparseVector::at(Index index) const noexcept {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                                   [](const Entry& e, Index i) { return e.first < i; });
  return it != entries_.end() && it->first == index ? it->second : 0.0;
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector v(dim_);
  if (factor == 0.0) return v;
  v.entries_ = entries_;
  for (auto& e : v.entries_) e.second *= factor;
  std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
  return v;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> dense(dim_, 0.0);
  for (const auto& [index, value] : entries_) dense[index] = value;
  return dense;
}

SparseVector combine(std::span<const SparseVector> blocks) {
  std::size_t total = 0;
  std::size_t nnz = 0;
  for (const auto& b : blocks) {
    total += b.dim();
    nnz += b.nnz();
  }
  std::vector<SparseVector::Entry> entries;
  entries.reserve(nnz);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (const auto& [index, value] : b.entries()) {
      entries.emplace_back(static_cast<SparseVector::Index>(offset + index), value);
    }
    offset += b.dim();
  }
  // Entries are already sorted and unique; from_pairs only re-checks.
  return SparseVector::from_pairs(total, std::move(entries));
}

}  // namespace emodist
