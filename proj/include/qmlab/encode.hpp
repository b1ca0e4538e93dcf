#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qmlab/qprob.hpp"
#include "qmlab/simcore.hpp"
#include "qmlab/state.hpp"

namespace qmlab {

class Rng;

enum class EncodingKind {
  kBasis,
  kAmplitude,
  kQSample,
  kPhase,
  kHamiltonian,
  kPauliParallel,
  kPauliSequential,
  kExponential,
};

std::string_view to_string(EncodingKind k);
EncodingKind encoding_kind_from_string(const std::string& s);

struct EncodingSpec {
  EncodingKind kind = EncodingKind::kAmplitude;
  int width = 0;     // basis: bits per integer field
  int repeats = 1;   // pauli-parallel/sequential: r; amplitude: tensor power
  int qubits = 1;    // exponential: N
  int base = 3;      // exponential: l
  double scale = 1;  // hamiltonian: generator multiplier γ
  CMatrix generator;  // hamiltonian: Hermitian generator (empty means Pauli Z)

  static EncodingSpec basis(int width);
  static EncodingSpec amplitude(int repeats = 1);
  static EncodingSpec qsample();
  static EncodingSpec phase();
  static EncodingSpec hamiltonian(const CMatrix& generator, double scale = 1.0);
  static EncodingSpec pauli_parallel(int r);
  static EncodingSpec pauli_sequential(int r);
  static EncodingSpec exponential(int n, int base = 3);

  void validate() const;
  bool is_hamiltonian_type() const;
  std::string to_json() const;
  static EncodingSpec from_json(const std::string& text);
};

enum class BitOrder { kBigEndian, kLittleEndian };

// Concatenates fixed-width binary fields of each value.
std::vector<int> integers_to_bits(std::span<const std::uint64_t> values, int width,
                                  BitOrder order = BitOrder::kBigEndian);

// Uniform superposition of the given bit strings; throws kDuplicateSample.
StateVector basis_encode(const std::vector<std::vector<int>>& samples);

enum class AmplitudeMode {
  kRequireNormalized,  // throws kNotNormalized for non-unit inputs
  kNormalize,          // each vector rescaled to unit norm, norms recorded
  kAugmentNorm,        // divide by the max norm, append sqrt(1 - |x|^2)
};

struct AmplitudeEncoding {
  StateVector state;
  std::vector<double> norms;  // input norms
  double scale = 1.0;         // global divisor in kAugmentNorm mode
  int index_qubits = 0;       // width of the |j> register
  int sample_qubits = 0;      // width of the |m> register
};

// (1/√M) Σ_m Σ_j x^m_j |j>|m>, the |j> register leading. Throws kZeroVector.
AmplitudeEncoding amplitude_encode(const std::vector<CVector>& vectors,
                                   AmplitudeMode mode = AmplitudeMode::kRequireNormalized);

StateVector qsample_encode(const ProbVector& p);

// ⊗_i (cos x_i |0> + sin x_i |1>).
StateVector phase_state(std::span<const double> x);
DensityMatrix phase_encode(std::span<const double> x);

// Hermitian generator of one encoding block (x multiplies it).
CMatrix encoding_generator(const EncodingSpec& spec);
RVector generator_eigenvalues(const EncodingSpec& spec);
int encoding_qubits(const EncodingSpec& spec);
// Number of encoding blocks in a model with `layers` data re-uploads.
int encoding_blocks(const EncodingSpec& spec, int layers);

// exp(-i x G); throws kUnsupportedKind for non-Hamiltonian kinds.
Gate encoding_unitary(const EncodingSpec& spec, double x);

// Embedding of a data vector as a pure state for any kind. Hamiltonian-type
// kinds take a single feature and act on |0...0>.
StateVector encode_state(const EncodingSpec& spec, std::span<const double> x);

struct FrequencySpectrum {
  std::vector<double> omegas;  // sorted, distinct
  bool is_integer(double tol = 1e-9) const;
  bool contains(double w, double tol = 1e-9) const;
  double max() const;
};

FrequencySpectrum frequency_spectrum(const EncodingSpec& spec, int layers);
// Differences of all `layers`-fold sums of `eigenvalues`.
FrequencySpectrum spectrum_from_eigenvalues(const RVector& eigenvalues, int layers);

struct FourierFit {
  std::map<long, Complex> coefficients;  // ω -> c_ω for ω in Ω
  double off_spectrum_power = 0;        // Σ |c_k|^2 over sampled k outside Ω
  double max_residual = 0;              // reconstruction error at probe points
  int samples = 0;
};

// DFT of `model` at `samples` equispaced points on [0, 2π); samples = 0 picks
// 4·max(Ω)+1. Throws kAliasedSpectrum for non-integer Ω or samples < 2·max(Ω)+1.
FourierFit fit_fourier_coefficients(const std::function<double(double)>& model, const FrequencySpectrum& omega,
                                    int samples = 0);

// f(x) = <0| U(x)† O U(x) |0> with U(x) = W_L S(x) ... W_1 S(x) W_0.
struct EncodedModel {
  EncodingSpec spec;
  int layers = 1;
  std::vector<CMatrix> trainables;  // encoding_blocks + 1 unitaries
  CMatrix observable;

  double operator()(double x) const;
  // Haar trainable blocks, each the product of `depth` Haar unitaries, and a
  // random Hermitian observable with entries of unit scale.
  static EncodedModel random(const EncodingSpec& spec, int layers, Rng& rng, int depth = 1);
};

}  // namespace qmlab
