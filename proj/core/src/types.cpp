#include "ripless/types.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace ripless {

const char* to_string(Field field) { return field == Field::Real ? "real" : "complex"; }

Field field_from_string(const std::string& name) {
  if (name == "real") return Field::Real;
  if (name == "complex") return Field::Complex;
  throw InvalidArgument("unknown field '" + name + "'");
}

Signal::Signal(RealVector entries) : entries_(std::move(entries)) {
  if (entries_.size() < 1) throw InvalidArgument("Signal: dimension must be >= 1");
  if (!entries_.allFinite()) throw InvalidArgument("Signal: entries must be finite");
}

Signal Signal::zeros(Index n) { return Signal(RealVector::Zero(n)); }

SupportSet::SupportSet(std::vector<Index> indices, Index ambient)
    : indices_(std::move(indices)), ambient_(ambient) {
  if (ambient_ < 0) throw InvalidArgument("SupportSet: negative ambient dimension");
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] < 0 || indices_[k] >= ambient_)
      throw InvalidArgument("SupportSet: index out of range");
    if (k > 0 && indices_[k] <= indices_[k - 1])
      throw InvalidArgument("SupportSet: indices must be strictly increasing");
  }
}

SupportSet SupportSet::full(Index ambient) {
  std::vector<Index> all(static_cast<std::size_t>(ambient));
  for (Index i = 0; i < ambient; ++i) all[static_cast<std::size_t>(i)] = i;
  return SupportSet(std::move(all), ambient);
}

SupportSet SupportSet::empty(Index ambient) { return SupportSet({}, ambient); }

SupportSet SupportSet::of(const Signal& x, double threshold) {
  std::vector<Index> idx;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > threshold) idx.push_back(i);
  return SupportSet(std::move(idx), x.size());
}

bool SupportSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

std::vector<Index> SupportSet::complement() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(ambient_ - size()));
  auto it = indices_.begin();
  for (Index i = 0; i < ambient_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

MeasurementMatrix::MeasurementMatrix(ComplexMatrix entries, Field field, double scaling,
                                     Provenance provenance)
    : entries_(std::move(entries)),
      field_(field),
      scaling_(scaling),
      provenance_(std::move(provenance)) {
  if (entries_.rows() < 1 || entries_.cols() < 1)
    throw InvalidArgument("MeasurementMatrix: m and n must be >= 1");
  if (!entries_.allFinite()) throw InvalidArgument("MeasurementMatrix: entries must be finite");
  if (!(scaling_ > 0.0) || !std::isfinite(scaling_))
    throw InvalidArgument("MeasurementMatrix: scaling must be positive");
  if (field_ == Field::Real && entries_.imag().cwiseAbs().maxCoeff() != 0.0)
    throw InvalidArgument("MeasurementMatrix: real field with nonzero imaginary parts");
}

MeasurementMatrix MeasurementMatrix::from_real(const RealMatrix& entries, Provenance provenance) {
  return MeasurementMatrix(entries.cast<Complex>(), Field::Real, 1.0, std::move(provenance));
}

RealMatrix MeasurementMatrix::real() const {
  if (field_ != Field::Real)
    throw InvalidArgument("MeasurementMatrix: complex matrix used where a real one is required");
  return entries_.real();
}

ComplexMatrix MeasurementMatrix::raw_rows() const { return entries_ / scaling_; }

MeasurementVector::MeasurementVector(ComplexVector entries, Field field, double sigma_m)
    : entries_(std::move(entries)), field_(field), sigma_m_(sigma_m) {
  if (!entries_.allFinite()) throw InvalidArgument("MeasurementVector: entries must be finite");
  if (!(sigma_m_ >= 0.0) || !std::isfinite(sigma_m_))
    throw InvalidArgument("MeasurementVector: sigma_m must be finite and >= 0");
  if (field_ == Field::Real && entries_.size() > 0 &&
      entries_.imag().cwiseAbs().maxCoeff() != 0.0)
    throw InvalidArgument("MeasurementVector: real field with nonzero imaginary parts");
}

MeasurementVector MeasurementVector::from_real(const RealVector& entries, double sigma_m) {
  return MeasurementVector(entries.cast<Complex>(), Field::Real, sigma_m);
}

RealVector MeasurementVector::real() const {
  if (field_ != Field::Real)
    throw InvalidArgument("MeasurementVector: complex vector used where a real one is required");
  return entries_.real();
}

}  // namespace ripless
