#include "riskclt/sample_set.hpp"

#include <cmath>
#include <sstream>

#include "riskclt/error.hpp"

namespace riskclt {

SampleSet::SampleSet(std::vector<double> values, std::size_t dim, Provenance provenance)
    : values_(std::move(values)), dim_(dim), provenance_(std::move(provenance)) {
  if (dim_ == 0) throw InvalidSample("sample dimension must be at least 1");
  if (values_.empty()) throw InvalidSample("sample must contain at least one observation");
  if (values_.size() % dim_ != 0) {
    throw InvalidSample("sample of " + std::to_string(values_.size()) +
                        " values is not a whole number of rows of dimension " +
                        std::to_string(dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "non-finite value at row " << i / dim_ << ", column " << i % dim_;
      throw InvalidSample(msg.str());
    }
  }
  provenance_.rows = size();
}

SampleSet SampleSet::from_scalars(std::vector<double> values, Provenance provenance) {
  return SampleSet(std::move(values), 1, std::move(provenance));
}

SampleSet SampleSet::affine(double scale, double shift) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = scale * values_[i] + shift;
  Provenance p = provenance_;
  std::ostringstream src;
  src.precision(17);
  src << scale << "*(" << p.source << ")+" << shift;
  p.source = src.str();
  return SampleSet(std::move(out), dim_, std::move(p));
}

void SampleSet::require_scalar(const char* who) const {
  if (dim_ != 1) {
    throw DimensionMismatch(std::string(who) + " requires scalar observations, got dimension " +
                            std::to_string(dim_));
  }
}

}  // namespace riskclt
