#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskclt {

/// Where a sample came from: a generator description plus seed, or a file.
struct Provenance {
  std::string source;
  std::optional<std::uint64_t> seed;
  std::size_t rows = 0;
};

/// Immutable set of n observation vectors in R^m, stored row-major.
///
/// Construction rejects empty samples, ragged data and non-finite values;
/// nothing is silently dropped.
class SampleSet {
 public:
  SampleSet(std::vector<double> values, std::size_t dim, Provenance provenance = {});

  static SampleSet from_scalars(std::vector<double> values, Provenance provenance = {});

  std::size_t size() const noexcept { return values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  /// Scalar observation; only meaningful when dim() == 1.
  double operator[](std::size_t i) const noexcept { return values_[i * dim_]; }

  std::span<const double> values() const noexcept { return values_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// a * X + b applied coordinate-wise; provenance is annotated.
  SampleSet affine(double scale, double shift) const;

  /// Throws DimensionMismatch unless dim() == 1.
  void require_scalar(const char* who) const;

 private:
  std::vector<double> values_;
  std::size_t dim_;
  Provenance provenance_;
};

}  // namespace riskclt
