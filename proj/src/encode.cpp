#include "qmlab/encode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"

namespace qmlab {

namespace {

constexpr std::pair<EncodingKind, std::string_view> kKindNames[] = {
    {EncodingKind::kBasis, "basis"},
    {EncodingKind::kAmplitude, "amplitude"},
    {EncodingKind::kQSample, "qsample"},
    {EncodingKind::kPhase, "phase"},
    {EncodingKind::kHamiltonian, "hamiltonian"},
    {EncodingKind::kPauliParallel, "pauli-parallel"},
    {EncodingKind::kPauliSequential, "pauli-sequential"},
    {EncodingKind::kExponential, "exponential"},
};

CMatrix pauli_z() {
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  return z;
}

// Σ_j w_j σ_z^{(j)} / 2 as a diagonal.
CMatrix weighted_z_sum(const std::vector<double>& weights) {
  const int n = static_cast<int>(weights.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix g = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double v = 0;
    for (int q = 0; q < n; ++q) v += (bit_of(static_cast<std::uint64_t>(i), q, n) ? -0.5 : 0.5) * weights[q];
    g(i, i) = v;
  }
  return g;
}

std::vector<double> dedup_sorted(std::vector<double> v, double tol = 1e-9) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

}  // namespace

std::string_view to_string(EncodingKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "unknown";
}

EncodingKind encoding_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  fail(ErrorCode::kUnsupportedKind, "unknown encoding kind '" + s + "'");
}

EncodingSpec EncodingSpec::basis(int width) {
  EncodingSpec s;
  s.kind = EncodingKind::kBasis;
  s.width = width;
  return s;
}

EncodingSpec EncodingSpec::amplitude(int repeats) {
  EncodingSpec s;
  s.kind = EncodingKind::kAmplitude;
  s.repeats = repeats;
  return s;
}

EncodingSpec EncodingSpec::qsample() {
  EncodingSpec s;
  s.kind = EncodingKind::kQSample;
  return s;
}

EncodingSpec EncodingSpec::phase() {
  EncodingSpec s;
  s.kind = EncodingKind::kPhase;
  return s;
}

EncodingSpec EncodingSpec::hamiltonian(const CMatrix& generator, double scale) {
  EncodingSpec s;
  s.kind = EncodingKind::kHamiltonian;
  s.generator = generator;
  s.scale = scale;
  s.validate();
  return s;
}

EncodingSpec EncodingSpec::pauli_parallel(int r) {
  EncodingSpec s;
  s.kind = EncodingKind::kPauliParallel;
  s.repeats = r;
  s.validate();
  return s;
}

EncodingSpec EncodingSpec::pauli_sequential(int r) {
  EncodingSpec s;
  s.kind = EncodingKind::kPauliSequential;
  s.repeats = r;
  s.validate();
  return s;
}

EncodingSpec EncodingSpec::exponential(int n, int base) {
  EncodingSpec s;
  s.kind = EncodingKind::kExponential;
  s.qubits = n;
  s.base = base;
  s.validate();
  return s;
}

void EncodingSpec::validate() const {
  switch (kind) {
    case EncodingKind::kBasis:
      require(width >= 0 && width <= 63, ErrorCode::kInvalidArgument, "basis width must be in [0, 63]");
      break;
    case EncodingKind::kAmplitude:
    case EncodingKind::kPauliParallel:
    case EncodingKind::kPauliSequential:
      require(repeats >= 1, ErrorCode::kInvalidArgument, "repeats must be >= 1");
      break;
    case EncodingKind::kExponential:
      require(qubits >= 1, ErrorCode::kInvalidArgument, "exponential encoding needs >= 1 qubit");
      require(base >= 2, ErrorCode::kInvalidArgument, "exponential base must be an integer >= 2");
      break;
    case EncodingKind::kHamiltonian:
      if (generator.size() != 0) {
        require(generator.rows() == generator.cols() && is_power_of_two(static_cast<std::uint64_t>(generator.rows())),
                ErrorCode::kUnsupportedGenerator, "generator must be square with power-of-two dimension");
        require(is_hermitian(generator), ErrorCode::kNotHermitian, "generator must be Hermitian");
      }
      require(std::isfinite(scale), ErrorCode::kInvalidArgument, "scale must be finite");
      break;
    case EncodingKind::kQSample:
    case EncodingKind::kPhase:
      break;
  }
}

bool EncodingSpec::is_hamiltonian_type() const {
  return kind == EncodingKind::kHamiltonian || kind == EncodingKind::kPauliParallel ||
         kind == EncodingKind::kPauliSequential || kind == EncodingKind::kExponential;
}

std::string EncodingSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind));
  switch (kind) {
    case EncodingKind::kBasis:
      j["width"] = width;
      break;
    case EncodingKind::kAmplitude:
    case EncodingKind::kPauliParallel:
    case EncodingKind::kPauliSequential:
      j["repeats"] = repeats;
      break;
    case EncodingKind::kExponential:
      j["qubits"] = qubits;
      j["base"] = base;
      break;
    case EncodingKind::kHamiltonian:
      j["scale"] = scale;
      if (generator.size() != 0) {
        j["dim"] = generator.rows();
        nlohmann::json data = nlohmann::json::array();
        for (Eigen::Index r = 0; r < generator.rows(); ++r)
          for (Eigen::Index c = 0; c < generator.cols(); ++c)
            data.push_back({generator(r, c).real(), generator(r, c).imag()});
        j["generator"] = std::move(data);
      }
      break;
    case EncodingKind::kQSample:
    case EncodingKind::kPhase:
      break;
  }
  return j.dump();
}

EncodingSpec EncodingSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("encoding JSON: ") + e.what());
  }
  EncodingSpec s;
  try {
    s.kind = encoding_kind_from_string(j.at("kind").get<std::string>());
    s.width = j.value("width", 0);
    s.repeats = j.value("repeats", 1);
    s.qubits = j.value("qubits", 1);
    s.base = j.value("base", 3);
    s.scale = j.value("scale", 1.0);
    if (j.contains("generator")) {
      const auto dim = j.at("dim").get<Eigen::Index>();
      const auto& data = j.at("generator");
      require(data.size() == static_cast<std::size_t>(dim * dim), ErrorCode::kBadConfig, "generator size mismatch");
      s.generator.resize(dim, dim);
      for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
          const auto& e = data[static_cast<std::size_t>(r * dim + c)];
          s.generator(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("encoding JSON: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<int> integers_to_bits(std::span<const std::uint64_t> values, int width, BitOrder order) {
  require(width >= 1 && width <= 64, ErrorCode::kInvalidArgument, "width must be in [1, 64]");
  std::vector<int> bits;
  bits.reserve(values.size() * static_cast<std::size_t>(width));
  for (auto v : values) {
    require(width == 64 || v < (std::uint64_t{1} << width), ErrorCode::kInvalidArgument,
            "value does not fit in declared width");
    for (int b = 0; b < width; ++b) {
      const int shift = order == BitOrder::kBigEndian ? width - 1 - b : b;
      bits.push_back(static_cast<int>((v >> shift) & 1U));
    }
  }
  return bits;
}

StateVector basis_encode(const std::vector<std::vector<int>>& samples) {
  require(!samples.empty(), ErrorCode::kInvalidArgument, "no samples");
  const auto n = samples.front().size();
  require(n >= 1 && n <= 30, ErrorCode::kInvalidArgument, "sample length must be in [1, 30]");
  std::set<std::uint64_t> seen;
  CVector amps = CVector::Zero(Eigen::Index{1} << n);
  const double a = 1.0 / std::sqrt(static_cast<double>(samples.size()));
  for (const auto& s : samples) {
    require(s.size() == n, ErrorCode::kLengthMismatch, "samples differ in length");
    std::uint64_t idx = 0;
    for (int b : s) {
      require(b == 0 || b == 1, ErrorCode::kInvalidArgument, "bits must be 0 or 1");
      idx = (idx << 1) | static_cast<std::uint64_t>(b);
    }
    require(seen.insert(idx).second, ErrorCode::kDuplicateSample, "duplicate sample in basis encoding");
    amps(static_cast<Eigen::Index>(idx)) = a;
  }
  return StateVector::from_amplitudes(amps);
}

AmplitudeEncoding amplitude_encode(const std::vector<CVector>& vectors, AmplitudeMode mode) {
  require(!vectors.empty(), ErrorCode::kInvalidArgument, "no vectors");
  const Eigen::Index len = vectors.front().size();
  require(len >= 1, ErrorCode::kBadLength, "empty vector");

  AmplitudeEncoding out;
  out.norms.reserve(vectors.size());
  for (const auto& v : vectors) {
    require(v.size() == len, ErrorCode::kLengthMismatch, "vectors differ in length");
    const double nrm = v.norm();
    require(nrm > 0, ErrorCode::kZeroVector, "zero vector in amplitude encoding");
    out.norms.push_back(nrm);
  }

  const Eigen::Index comps = mode == AmplitudeMode::kAugmentNorm ? len + 1 : len;
  if (mode == AmplitudeMode::kAugmentNorm) out.scale = *std::max_element(out.norms.begin(), out.norms.end());
  const auto m = static_cast<std::uint64_t>(vectors.size());
  out.index_qubits = index_bits(static_cast<std::uint64_t>(comps));
  out.sample_qubits = index_bits(m);
  require(out.index_qubits + out.sample_qubits <= 30, ErrorCode::kInvalidArgument, "encoding too large");
  const int n = std::max(1, out.index_qubits + out.sample_qubits);

  CVector amps = CVector::Zero(Eigen::Index{1} << n);
  const double w = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::uint64_t k = 0; k < m; ++k) {
    const CVector& v = vectors[k];
    CVector x;
    switch (mode) {
      case AmplitudeMode::kRequireNormalized:
        require(std::abs(out.norms[k] - 1.0) < 1e-10, ErrorCode::kNotNormalized, "vector is not unit norm");
        x = v;
        break;
      case AmplitudeMode::kNormalize:
        x = v / out.norms[k];
        break;
      case AmplitudeMode::kAugmentNorm: {
        x.resize(comps);
        x.head(len) = v / out.scale;
        const double r = out.norms[k] / out.scale;
        x(len) = std::sqrt(std::max(0.0, 1.0 - r * r));
        break;
      }
    }
    for (Eigen::Index j = 0; j < comps; ++j)
      amps((j << out.sample_qubits) + static_cast<Eigen::Index>(k)) = w * x(j);
  }
  out.state = StateVector::normalized(amps);
  return out;
}

StateVector qsample_encode(const ProbVector& p) {
  require(is_power_of_two(p.size()) && p.size() >= 2, ErrorCode::kBadLength,
          "qsample length must be a power of two >= 2");
  CVector amps(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) amps(static_cast<Eigen::Index>(i)) = std::sqrt(p[i]);
  return StateVector::normalized(amps);
}

StateVector phase_state(std::span<const double> x) {
  require(!x.empty() && x.size() <= 30, ErrorCode::kInvalidArgument, "phase encoding needs 1..30 features");
  CVector amps = CVector::Ones(1);
  for (double xi : x) {
    CVector q(2);
    q << std::cos(xi), std::sin(xi);
    CVector next(amps.size() * 2);
    for (Eigen::Index i = 0; i < amps.size(); ++i) next.segment(2 * i, 2) = amps(i) * q;
    amps = std::move(next);
  }
  return StateVector::from_amplitudes(amps);
}

DensityMatrix phase_encode(std::span<const double> x) { return DensityMatrix::from_pure(phase_state(x)); }

CMatrix encoding_generator(const EncodingSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EncodingKind::kHamiltonian:
      return spec.scale * (spec.generator.size() == 0 ? pauli_z() : spec.generator);
    case EncodingKind::kPauliParallel:
      return weighted_z_sum(std::vector<double>(static_cast<std::size_t>(spec.repeats), 1.0));
    case EncodingKind::kPauliSequential:
      return weighted_z_sum({1.0});
    case EncodingKind::kExponential: {
      std::vector<double> beta(static_cast<std::size_t>(spec.qubits));
      double b = 1;
      for (auto& v : beta) {
        v = b;
        b *= spec.base;
      }
      return weighted_z_sum(beta);
    }
    default:
      fail(ErrorCode::kUnsupportedKind,
           "encoding kind '" + std::string(to_string(spec.kind)) + "' has no generator");
  }
}

RVector generator_eigenvalues(const EncodingSpec& spec) {
  const CMatrix g = encoding_generator(spec);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

int encoding_qubits(const EncodingSpec& spec) {
  return index_bits(static_cast<std::uint64_t>(encoding_generator(spec).rows()));
}

int encoding_blocks(const EncodingSpec& spec, int layers) {
  require(layers >= 1, ErrorCode::kInvalidArgument, "layers must be >= 1");
  return spec.kind == EncodingKind::kPauliSequential ? layers * spec.repeats : layers;
}

Gate encoding_unitary(const EncodingSpec& spec, double x) {
  require(spec.is_hamiltonian_type(), ErrorCode::kUnsupportedKind,
          "encoding kind '" + std::string(to_string(spec.kind)) + "' is not Hamiltonian-type");
  return exp_hamiltonian(encoding_generator(spec), x);
}

StateVector encode_state(const EncodingSpec& spec, std::span<const double> x) {
  spec.validate();
  switch (spec.kind) {
    case EncodingKind::kBasis: {
      std::vector<int> bits;
      if (spec.width > 0) {
        std::vector<std::uint64_t> v;
        for (double xi : x) {
          require(xi >= 0 && xi == std::floor(xi), ErrorCode::kInvalidArgument, "basis features must be integers");
          v.push_back(static_cast<std::uint64_t>(xi));
        }
        bits = integers_to_bits(v, spec.width);
      } else {
        for (double xi : x) bits.push_back(xi != 0 ? 1 : 0);
      }
      return basis_encode({bits});
    }
    case EncodingKind::kAmplitude: {
      CVector v(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
      CVector psi = amplitude_encode({v}, AmplitudeMode::kNormalize).state.amplitudes();
      CVector out = psi;
      for (int r = 1; r < spec.repeats; ++r) out = kron(out, psi);
      return StateVector::from_amplitudes(out);
    }
    case EncodingKind::kQSample:
      return qsample_encode(ProbVector::from(std::vector<double>(x.begin(), x.end())));
    case EncodingKind::kPhase:
      return phase_state(x);
    default: {
      // |+>^n followed by one encoding block per feature.
      const CMatrix g = encoding_generator(spec);
      const Eigen::Index dim = g.rows();
      CVector amps = CVector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
      for (double xi : x) amps = exp_hermitian(g, xi) * amps;
      return StateVector::normalized(amps);
    }
  }
}

bool FrequencySpectrum::is_integer(double tol) const {
  return std::all_of(omegas.begin(), omegas.end(), [&](double w) { return std::abs(w - std::round(w)) <= tol; });
}

bool FrequencySpectrum::contains(double w, double tol) const {
  auto it = std::lower_bound(omegas.begin(), omegas.end(), w - tol);
  return it != omegas.end() && std::abs(*it - w) <= tol;
}

double FrequencySpectrum::max() const { return omegas.empty() ? 0.0 : omegas.back(); }

FrequencySpectrum spectrum_from_eigenvalues(const RVector& eigenvalues, int layers) {
  require(layers >= 1, ErrorCode::kInvalidArgument, "layers must be >= 1");
  std::vector<double> base = dedup_sorted({eigenvalues.data(), eigenvalues.data() + eigenvalues.size()});
  std::vector<double> sums{0.0};
  for (int l = 0; l < layers; ++l) {
    std::vector<double> next;
    next.reserve(sums.size() * base.size());
    for (double s : sums)
      for (double b : base) next.push_back(s + b);
    sums = dedup_sorted(std::move(next));
  }
  std::vector<double> diffs;
  diffs.reserve(sums.size() * sums.size());
  for (double a : sums)
    for (double b : sums) diffs.push_back(a - b);
  FrequencySpectrum out;
  out.omegas = dedup_sorted(std::move(diffs));
  // Snap near-integers so that symmetric pairs compare exactly.
  for (auto& w : out.omegas)
    if (std::abs(w - std::round(w)) < 1e-9) w = std::round(w);
  return out;
}

FrequencySpectrum frequency_spectrum(const EncodingSpec& spec, int layers) {
  return spectrum_from_eigenvalues(generator_eigenvalues(spec), encoding_blocks(spec, layers));
}

FourierFit fit_fourier_coefficients(const std::function<double(double)>& model, const FrequencySpectrum& omega,
                                    int samples) {
  require(omega.is_integer(), ErrorCode::kAliasedSpectrum, "spectrum is not integer-valued");
  const long wmax = std::lround(omega.max());
  if (samples == 0) samples = static_cast<int>(4 * wmax + 1);
  require(samples >= 2 * wmax + 1, ErrorCode::kAliasedSpectrum,
          "need at least 2*max(omega)+1 samples, got " + std::to_string(samples));

  std::vector<double> f(static_cast<std::size_t>(samples));
  const double step = 2 * std::numbers::pi / samples;
  for (int j = 0; j < samples; ++j) f[static_cast<std::size_t>(j)] = model(j * step);

  FourierFit fit;
  fit.samples = samples;
  // Frequencies k in (-samples/2, samples/2].
  const long kmin = -((samples - 1) / 2);
  const long kmax = samples / 2;
  for (long k = kmin; k <= kmax; ++k) {
    Complex c = 0;
    for (int j = 0; j < samples; ++j)
      c += f[static_cast<std::size_t>(j)] * std::polar(1.0, -static_cast<double>(k) * j * step);
    c /= static_cast<double>(samples);
    if (omega.contains(static_cast<double>(k)))
      fit.coefficients[k] = c;
    else
      fit.off_spectrum_power += std::norm(c);
  }

  // Reconstruction at points between the sampling grid.
  for (int j = 0; j < samples; ++j) {
    const double x = (j + 0.5) * step;
    Complex g = 0;
    for (const auto& [w, c] : fit.coefficients) g += c * std::polar(1.0, static_cast<double>(w) * x);
    fit.max_residual = std::max(fit.max_residual, std::abs(g - model(x)));
  }
  return fit;
}

double EncodedModel::operator()(double x) const {
  const CMatrix s = encoding_unitary(spec, x).matrix();
  CVector psi = CVector::Zero(s.rows());
  psi(0) = 1;
  psi = trainables.front() * psi;
  for (std::size_t b = 1; b < trainables.size(); ++b) psi = trainables[b] * (s * psi);
  return (psi.adjoint() * observable * psi)(0, 0).real();
}

EncodedModel EncodedModel::random(const EncodingSpec& spec, int layers, Rng& rng, int depth) {
  require(depth >= 1, ErrorCode::kInvalidArgument, "depth must be >= 1");
  EncodedModel m;
  m.spec = spec;
  m.layers = layers;
  const int dim = static_cast<int>(encoding_generator(spec).rows());
  const int blocks = encoding_blocks(spec, layers);
  for (int b = 0; b <= blocks; ++b) {
    CMatrix w = CMatrix::Identity(dim, dim);
    for (int d = 0; d < depth; ++d) w = haar_random_unitary(dim, rng).matrix() * w;
    m.trainables.push_back(std::move(w));
  }
  CMatrix a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = Complex(rng.normal(), rng.normal());
  m.observable = (a + a.adjoint()) / 2.0;
  return m;
}

}  // namespace qmlab
