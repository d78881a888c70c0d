#include "ripless/ensembles.hpp"

#include "ripless/linalg.hpp"
#include "ripless/signal_ops.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

namespace ripless::ensembles {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct FamilyName {
  Family family;
  const char* name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::Gaussian, "gaussian"},
    {Family::Binary, "binary"},
    {Family::SubsampledOrthogonal, "subsampled_orthogonal"},
    {Family::SubsampledDFT, "subsampled_dft"},
    {Family::RandomConvolution, "random_convolution"},
    {Family::CoordinateSampling, "coordinate_sampling"},
    {Family::ContinuousFourier, "continuous_fourier"},
};

bool has_imaginary(const ComplexMatrix& M) {
  return M.size() > 0 && M.imag().cwiseAbs().maxCoeff() != 0.0;
}

void require_dimension(Index n) {
  if (n < 1) throw InvalidArgument("ensemble dimension must be >= 1");
}

}  // namespace

std::string to_string(Family family) {
  for (const auto& entry : kFamilyNames)
    if (entry.family == family) return entry.name;
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (const auto& entry : kFamilyNames)
    if (name == entry.name) return entry.family;
  throw InvalidArgument("unknown ensemble family '" + name + "'");
}

EnsembleSpec::EnsembleSpec(Family family, Index n, std::uint64_t seed, Field field)
    : family_(family), n_(n), seed_(seed), field_(field) {
  require_dimension(n);
}

EnsembleSpec EnsembleSpec::gaussian(Index n, std::uint64_t seed) {
  return EnsembleSpec(Family::Gaussian, n, seed, Field::Real);
}

EnsembleSpec EnsembleSpec::binary(Index n, std::uint64_t seed) {
  return EnsembleSpec(Family::Binary, n, seed, Field::Real);
}

EnsembleSpec EnsembleSpec::subsampled_dft(Index n, std::uint64_t seed) {
  return EnsembleSpec(Family::SubsampledDFT, n, seed, Field::Complex);
}

EnsembleSpec EnsembleSpec::coordinate_sampling(Index n, std::uint64_t seed) {
  return EnsembleSpec(Family::CoordinateSampling, n, seed, Field::Real);
}

EnsembleSpec EnsembleSpec::continuous_fourier(Index n, std::uint64_t seed) {
  return EnsembleSpec(Family::ContinuousFourier, n, seed, Field::Complex);
}

EnsembleSpec EnsembleSpec::subsampled_orthogonal(ComplexMatrix U, std::uint64_t seed,
                                                 nlohmann::json params) {
  if (U.rows() != U.cols()) throw InvalidArgument("subsampled_orthogonal: U must be square");
  const Index n = U.rows();
  require_dimension(n);
  if (!U.allFinite()) throw InvalidArgument("subsampled_orthogonal: U must be finite");
  const ComplexMatrix gram = U.adjoint() * U - static_cast<double>(n) * ComplexMatrix::Identity(n, n);
  if (operator_norm(gram) > 1e-8 * static_cast<double>(n))
    throw InvalidArgument("subsampled_orthogonal: U^*U must equal nI");
  EnsembleSpec spec(Family::SubsampledOrthogonal, n, seed,
                    has_imaginary(U) ? Field::Complex : Field::Real);
  spec.orthogonal_ = std::move(U);
  spec.params_ = params.is_null() ? nlohmann::json::object() : std::move(params);
  return spec;
}

EnsembleSpec EnsembleSpec::random_convolution(ComplexVector g, std::uint64_t seed,
                                              nlohmann::json params) {
  const Index n = g.size();
  require_dimension(n);
  if (!g.allFinite()) throw InvalidArgument("random_convolution: g must be finite");
  Eigen::FFT<double> fft;
  std::vector<Complex> time(g.data(), g.data() + n), freq;
  fft.fwd(freq, time);
  double lo = std::abs(freq[0]), hi = lo;
  for (const auto& c : freq) {
    lo = std::min(lo, std::abs(c));
    hi = std::max(hi, std::abs(c));
  }
  if (!(hi > 0.0) || (hi - lo) > 1e-8 * hi)
    throw InvalidArgument("random_convolution: Fourier coefficients of g must have equal magnitude");
  const double scale = std::sqrt(static_cast<double>(n)) / hi;
  EnsembleSpec spec(Family::RandomConvolution, n, seed,
                    has_imaginary(g) ? Field::Complex : Field::Real);
  spec.filter_ = g * scale;
  spec.spectrum_ = Eigen::Map<ComplexVector>(freq.data(), n) * scale;
  spec.params_ = params.is_null() ? nlohmann::json::object() : std::move(params);
  return spec;
}

ComplexMatrix hadamard(Index n) {
  if (n < 1 || (n & (n - 1)) != 0) throw InvalidArgument("hadamard: n must be a power of two");
  ComplexMatrix H = ComplexMatrix::Ones(1, 1);
  while (H.rows() < n) {
    const Index k = H.rows();
    ComplexMatrix next(2 * k, 2 * k);
    next << H, H, H, -H;
    H = std::move(next);
  }
  return H;
}

ComplexMatrix dft_matrix(Index n) {
  ComplexMatrix U(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index t = 0; t < n; ++t)
      U(k, t) = std::polar(1.0, -kTwoPi * static_cast<double>((k * t) % n) / static_cast<double>(n));
  return U;
}

ComplexVector random_phase_filter(Index n, Rng& rng) {
  // Hermitian-symmetric spectrum so that g is real.
  std::vector<Complex> freq(static_cast<std::size_t>(n));
  const double mag = std::sqrt(static_cast<double>(n));
  for (Index k = 0; k <= n / 2; ++k) {
    const Index mirror = (n - k) % n;
    if (mirror == k) {
      freq[static_cast<std::size_t>(k)] = Complex(mag * rng.rademacher(), 0.0);
    } else {
      const Complex c = std::polar(mag, kTwoPi * rng.uniform());
      freq[static_cast<std::size_t>(k)] = c;
      freq[static_cast<std::size_t>(mirror)] = std::conj(c);
    }
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> time;
  fft.inv(time, freq);
  ComplexVector g(n);
  for (Index t = 0; t < n; ++t) g[t] = Complex(time[static_cast<std::size_t>(t)].real(), 0.0);
  return g;
}

namespace {

ComplexMatrix orthogonal_from_params(const nlohmann::json& params, Index n) {
  const std::string kind = params.value("matrix", std::string("hadamard"));
  if (kind == "hadamard") return hadamard(n);
  if (kind == "dft") return dft_matrix(n);
  throw InvalidArgument("subsampled_orthogonal: unknown matrix generator '" + kind + "'");
}

ComplexVector filter_from_params(const nlohmann::json& params, Index n, std::uint64_t seed) {
  if (params.contains("g")) {
    const auto& re = params.at("g");
    ComplexVector g(static_cast<Index>(re.size()));
    for (Index t = 0; t < g.size(); ++t) g[t] = Complex(re.at(static_cast<std::size_t>(t)).get<double>(), 0.0);
    if (params.contains("g_imag")) {
      const auto& im = params.at("g_imag");
      if (static_cast<Index>(im.size()) != g.size())
        throw InvalidArgument("random_convolution: g and g_imag lengths differ");
      for (Index t = 0; t < g.size(); ++t) g[t].imag(im.at(static_cast<std::size_t>(t)).get<double>());
    }
    if (g.size() != n) throw InvalidArgument("random_convolution: len(g) != n");
    return g;
  }
  const std::string kind = params.value("filter", std::string("random_phase"));
  if (kind != "random_phase")
    throw InvalidArgument("random_convolution: unknown filter generator '" + kind + "'");
  Rng rng = Rng(seed).split(0x66696c746572ULL);
  return random_phase_filter(n, rng);
}

}  // namespace

EnsembleSpec EnsembleSpec::from_json(const nlohmann::json& j) {
  const Family family = family_from_string(j.at("family").get<std::string>());
  const Index n = j.at("n").get<Index>();
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  switch (family) {
    case Family::Gaussian: return gaussian(n, seed);
    case Family::Binary: return binary(n, seed);
    case Family::SubsampledDFT: return subsampled_dft(n, seed);
    case Family::CoordinateSampling: return coordinate_sampling(n, seed);
    case Family::ContinuousFourier: return continuous_fourier(n, seed);
    case Family::SubsampledOrthogonal:
      return subsampled_orthogonal(orthogonal_from_params(params, n), seed, params);
    case Family::RandomConvolution:
      return random_convolution(filter_from_params(params, n, seed), seed, params);
  }
  throw InvalidArgument("unreachable ensemble family");
}

nlohmann::json EnsembleSpec::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family_);
  j["n"] = n_;
  j["seed"] = seed_;
  j["params"] = params_;
  return j;
}

EnsembleSpec EnsembleSpec::with_dimension(Index n) const {
  if (n == n_) return *this;
  nlohmann::json j = to_json();
  j["n"] = n;
  if (family_ == Family::RandomConvolution && params_.contains("g"))
    throw InvalidArgument("random_convolution with an explicit filter has a fixed dimension");
  return from_json(j);
}

EnsembleSpec EnsembleSpec::with_seed(std::uint64_t seed) const {
  EnsembleSpec copy = *this;
  copy.seed_ = seed;
  return copy;
}

ComplexVector sample_row(const EnsembleSpec& spec, Rng& rng) {
  const Index n = spec.n();
  ComplexVector a = ComplexVector::Zero(n);
  switch (spec.family()) {
    case Family::Gaussian:
      for (Index t = 0; t < n; ++t) a[t] = rng.normal();
      break;
    case Family::Binary:
      for (Index t = 0; t < n; ++t) a[t] = rng.rademacher();
      break;
    case Family::SubsampledDFT: {
      const auto k = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      for (Index t = 0; t < n; ++t)
        a[t] = std::polar(1.0, kTwoPi * static_cast<double>((k * t) % n) / static_cast<double>(n));
      break;
    }
    case Family::CoordinateSampling: {
      const auto i = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      a[i] = std::sqrt(static_cast<double>(n));
      break;
    }
    case Family::ContinuousFourier: {
      const double omega = rng.uniform();
      for (Index t = 0; t < n; ++t) a[t] = std::polar(1.0, kTwoPi * omega * static_cast<double>(t));
      break;
    }
    case Family::SubsampledOrthogonal: {
      const auto k = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      a = spec.orthogonal().row(k).adjoint();
      break;
    }
    case Family::RandomConvolution: {
      // Row t of the circulant G is g shifted by t; build it in the Fourier
      // domain (phase ramp) and transform back.
      const auto shift = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      const ComplexVector& spectrum = spec.filter_spectrum();
      std::vector<Complex> freq(static_cast<std::size_t>(n)), time;
      for (Index k = 0; k < n; ++k)
        freq[static_cast<std::size_t>(k)] =
            spectrum[k] *
            std::polar(1.0, -kTwoPi * static_cast<double>((k * shift) % n) / static_cast<double>(n));
      Eigen::FFT<double> fft;
      fft.inv(time, freq);
      for (Index t = 0; t < n; ++t) a[t] = std::conj(time[static_cast<std::size_t>(t)]);
      if (spec.field() == Field::Real) a = a.real().cast<Complex>();
      break;
    }
  }
  return a;
}

MeasurementMatrix build_matrix(const EnsembleSpec& spec, Index m, Rng& rng) {
  if (m < 1) throw InvalidArgument("build_matrix: m must be >= 1");
  Provenance provenance{spec.to_json().dump(), rng.seed()};
  const double scaling = 1.0 / std::sqrt(static_cast<double>(m));
  ComplexMatrix A(m, spec.n());
  for (Index k = 0; k < m; ++k) A.row(k) = sample_row(spec, rng).adjoint() * scaling;
  return MeasurementMatrix(std::move(A), spec.field(), scaling, std::move(provenance));
}

double isotropy_check(const EnsembleSpec& spec, Index num_samples, Rng& rng) {
  if (num_samples < 1) throw InvalidArgument("isotropy_check: need at least one sample");
  const Index n = spec.n();
  ComplexMatrix W = ComplexMatrix::Zero(n, n);
  for (Index k = 0; k < num_samples; ++k) {
    const ComplexVector a = sample_row(spec, rng);
    W.noalias() += a * a.adjoint();
  }
  W /= static_cast<double>(num_samples);
  return linalg::identity_deviation(ComplexMatrix((W + W.adjoint()) / 2.0));
}

NearIsotropy near_isotropy_deviation(const ComplexMatrix& W) {
  if (W.rows() != W.cols()) throw InvalidArgument("near_isotropy_deviation: W must be square");
  const Index n = W.rows();
  NearIsotropy out;
  out.deviation = operator_norm(ComplexMatrix(W - ComplexMatrix::Identity(n, n)));
  out.threshold = 1.0 / (8.0 * std::sqrt(static_cast<double>(n)));
  out.pass = out.deviation <= out.threshold;
  return out;
}

ConditionalMoment conditional_second_moment(const EnsembleSpec& spec, double mu, Index samples,
                                            Rng& rng) {
  if (samples < 1) throw InvalidArgument("conditional_second_moment: need samples >= 1");
  const Index n = spec.n();
  ConditionalMoment out;
  out.second_moment = ComplexMatrix::Zero(n, n);
  while (out.accepted < samples) {
    const ComplexVector a = sample_row(spec, rng);
    ++out.drawn;
    if (a.cwiseAbs2().maxCoeff() > mu) continue;
    out.second_moment.noalias() += a * a.adjoint();
    ++out.accepted;
  }
  out.second_moment /= static_cast<double>(samples);
  return out;
}

}  // namespace ripless::ensembles
