#pragma once

#include <cstddef>
#include <span>

namespace riskclt {

inline constexpr std::size_t kPairwiseBlock = 32;

/// Pairwise (tree) sum of term(i) for i in [begin, end). Blocks of
/// kPairwiseBlock terms are summed left to right; blocks are combined as a
/// balanced binary tree, so the rounding error grows as O(log n).
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  const std::size_t count = end - begin;
  if (count <= kPairwiseBlock) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = begin + count / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

inline double pairwise_sum(std::span<const double> values) {
  return pairwise_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

template <class Term>
double pairwise_mean(std::size_t n, const Term& term) {
  return pairwise_sum(0, n, term) / static_cast<double>(n);
}

inline double pairwise_mean(std::span<const double> values) {
  return pairwise_sum(values) / static_cast<double>(values.size());
}

/// Population-style variance (1/n normalization) with a two-pass pairwise
/// scheme.
inline double population_variance(std::span<const double> values) {
  const double mean = pairwise_mean(values);
  return pairwise_mean(values.size(), [&](std::size_t i) {
    const double r = values[i] - mean;
    return r * r;
  });
}

}  // namespace riskclt
