#include <cmath>
#include <numbers>

#include "qmlab/encode.hpp"
#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "support.hpp"

using namespace qmlab;
using qmlab::test::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

CVector random_unit(int dim, Rng& rng) {
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v.normalized();
}

double pure_kernel(const StateVector& a, const StateVector& b) { return std::norm(a.inner(b)); }

std::vector<EncodingSpec> hamiltonian_specs() {
  CMatrix y(2, 2);
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  return {EncodingSpec::hamiltonian(CMatrix(), 1.0),      EncodingSpec::hamiltonian(y, 0.5),
          EncodingSpec::pauli_parallel(1),                EncodingSpec::pauli_parallel(3),
          EncodingSpec::pauli_sequential(2),              EncodingSpec::exponential(2),
          EncodingSpec::exponential(3, 2)};
}

}  // namespace

TEST_CASE("basis encoding of a two-sample dataset") {
  const auto psi = basis_encode({{0, 1, 0, 0}, {1, 0, 1, 1}});
  REQUIRE(psi.num_qubits() == 4);
  CVector expect = CVector::Zero(16);
  expect(0b0100) = expect(0b1011) = 1.0 / std::sqrt(2.0);
  CHECK(max_abs(psi.amplitudes() - expect) < 1e-15);

  CHECK(max_abs(basis_encode({{1, 0, 1}}).amplitudes() - StateVector::basis(3, 5).amplitudes()) < 1e-15);
  const auto uniform = basis_encode({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(max_abs(uniform.amplitudes() - CVector::Constant(4, 0.5)) < 1e-15);

  CHECK_THROWS_AS(basis_encode({{0, 1}, {0, 1}}), Error);
  try {
    basis_encode({{1, 1}, {1, 1}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDuplicateSample);
  }
}

TEST_CASE("integer fields are converted with the declared width") {
  const std::vector<std::uint64_t> v{2, 1};
  CHECK(integers_to_bits(v, 2) == std::vector<int>{1, 0, 0, 1});
  CHECK(integers_to_bits(v, 2, BitOrder::kLittleEndian) == std::vector<int>{0, 1, 1, 0});
  CHECK(integers_to_bits(v, 4) == std::vector<int>{0, 0, 1, 0, 0, 0, 0, 1});
  CHECK_THROWS_AS(integers_to_bits(std::vector<std::uint64_t>{4}, 2), Error);
}

TEST_CASE("amplitude encoding layout and modes") {
  Rng rng(11);
  const CVector x = random_unit(4, rng);
  const auto one = amplitude_encode({x});
  CHECK(one.state.num_qubits() == 2);
  CHECK(max_abs(one.state.amplitudes() - x) < 1e-15);

  // Orthogonal inputs give orthogonal branches of the |j> register.
  CVector a = CVector::Zero(2), b = CVector::Zero(2);
  a(0) = 1;
  b(1) = 1;
  const auto pair = amplitude_encode({a, b});
  const CVector& amp = pair.state.amplitudes();
  CVector branch0(2), branch1(2);
  for (int j = 0; j < 2; ++j) {
    branch0(j) = amp(j * 2 + 0);
    branch1(j) = amp(j * 2 + 1);
  }
  CHECK(std::abs(branch0.dot(branch1)) < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const int len = 1 + static_cast<int>(rng.below(7));
    const int m = 1 + static_cast<int>(rng.below(6));
    std::vector<CVector> vs;
    for (int k = 0; k < m; ++k) vs.push_back(random_unit(len, rng));
    const auto enc = amplitude_encode(vs);
    CHECK(enc.state.num_qubits() == std::max(1, index_bits(len) + index_bits(m)));
    for (int j = 0; j < len; ++j)
      for (int k = 0; k < m; ++k)
        CHECK(std::abs(enc.state[(static_cast<std::uint64_t>(j) << enc.sample_qubits) + k] -
                       vs[k](j) / std::sqrt(static_cast<double>(m))) < 1e-12);
  }

  CVector big(2);
  big << 3, 4;
  CHECK_THROWS_AS(amplitude_encode({big}), Error);
  const auto norm = amplitude_encode({big}, AmplitudeMode::kNormalize);
  CHECK(norm.norms[0] == doctest::Approx(5.0));
  CHECK(std::abs(norm.state[0] - 0.6) < 1e-15);

  CVector small(2);
  small << 0.3, 0.4;
  const auto aug = amplitude_encode({big, small}, AmplitudeMode::kAugmentNorm);
  CHECK(aug.scale == doctest::Approx(5.0));
  CHECK(aug.index_qubits == 2);
  // Component 2 of sample 1 carries sqrt(1 - (0.5/5)^2).
  CHECK(std::abs(aug.state[(2u << 1) + 1] - std::sqrt((1 - 0.01) / 2)) < 1e-14);
  CHECK(std::abs(aug.state[(2u << 1) + 0]) < 1e-15);

  try {
    amplitude_encode({CVector::Zero(2)}, AmplitudeMode::kNormalize);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroVector);
  }
}

TEST_CASE("qsample encoding") {
  const auto plus = qsample_encode(ProbVector::from({0.5, 0.5}));
  CHECK(std::abs(plus[0] - 1 / std::sqrt(2.0)) < 1e-15);
  const auto bell = qsample_encode(ProbVector::from({0.5, 0, 0, 0.5}));
  CHECK(std::abs(bell[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(bell[3] - 1 / std::sqrt(2.0)) < 1e-15);
  const std::vector<int> keep{0};
  const auto marginal = partial_trace_qubits(DensityMatrix::from_pure(bell), keep);
  CHECK(max_abs(marginal.matrix() - CMatrix::Identity(2, 2) / 2.0) < 1e-15);

  try {
    qsample_encode(ProbVector::from({0.2, 0.3, 0.5}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadLength);
  }

  Rng rng(5);
  const auto p = ProbVector::from({0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.15, 0.05});
  const auto psi = qsample_encode(p);
  const int shots = 20000;
  const auto counts = sample_counts(psi, shots, rng);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double sigma = std::sqrt(p[i] * (1 - p[i]) / shots);
    CHECK(std::abs(static_cast<double>(counts[i]) / shots - p[i]) < 5 * sigma);
  }
}

TEST_CASE("phase encoding kernel is a product of squared cosines") {
  Rng rng(3);
  const std::vector<double> x0{0.7};
  const std::vector<double> x1{0.7 + kPi / 2};
  CHECK(std::abs(phase_encode(x0).matrix().cwiseProduct(phase_encode(x0).matrix().transpose()).sum() - 1.0) <
        1e-12);
  CHECK(std::abs((phase_encode(x0).matrix() * phase_encode(x1).matrix()).trace()) < 1e-12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3), y(3);
    double expect = 1;
    for (int i = 0; i < 3; ++i) {
      x[i] = rng.uniform(0, 2 * kPi);
      y[i] = rng.uniform(0, 2 * kPi);
      expect *= std::pow(std::cos(x[i] - y[i]), 2);
    }
    const Complex k = (phase_encode(x).matrix() * phase_encode(y).matrix()).trace();
    CHECK(std::abs(k - expect) < 1e-12);
  }
}

TEST_CASE("encoding unitaries") {
  CHECK(max_abs(encoding_unitary(EncodingSpec::pauli_sequential(1), 0.0).matrix() - CMatrix::Identity(2, 2)) <
        1e-15);

  const double x = 0.37;
  const CMatrix u = encoding_unitary(EncodingSpec::exponential(2, 3), x).matrix();
  // diag phases exp(-i x (±1 ± 3)/2), qubit 0 weighted by 1.
  const double w[4] = {(1 + 3) / 2.0, (1 - 3) / 2.0, (-1 + 3) / 2.0, (-1 - 3) / 2.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(u(i, i) - std::polar(1.0, -x * w[i])) < 1e-14);
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(u(i, j)) < 1e-15);
  }

  const RVector ev = generator_eigenvalues(EncodingSpec::pauli_parallel(3));
  std::vector<double> distinct;
  for (double e : ev)
    if (distinct.empty() || e - distinct.back() > 1e-9) distinct.push_back(e);
  REQUIRE(distinct.size() == 4);
  for (int p = 0; p < 4; ++p) CHECK(distinct[p] == doctest::Approx((2.0 * p - 3) / 2));

  for (const auto& s : hamiltonian_specs()) CHECK(is_unitary(encoding_unitary(s, 1.3).matrix()));
  try {
    encoding_unitary(EncodingSpec::amplitude(), 0.1);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedKind);
  }
}

TEST_CASE("frequency spectra") {
  const auto single = frequency_spectrum(EncodingSpec::hamiltonian(CMatrix(), 1.0), 1);
  CHECK(single.omegas == std::vector<double>{-2, 0, 2});
  for (int r = 1; r <= 5; ++r) {
    std::vector<double> expect;
    for (int k = -r; k <= r; ++k) expect.push_back(k);
    CHECK(frequency_spectrum(EncodingSpec::pauli_parallel(r), 1).omegas == expect);
    CHECK(frequency_spectrum(EncodingSpec::pauli_sequential(r), 1).omegas == expect);
  }
  for (int n = 1; n <= 5; ++n) {
    const auto s = frequency_spectrum(EncodingSpec::exponential(n, 3), 1);
    CHECK(s.omegas.size() == static_cast<std::size_t>(std::pow(3, n)));
    // Balanced ternary covers every integer up to (3^n - 1) / 2.
    CHECK(s.max() == doctest::Approx((std::pow(3, n) - 1) / 2));
    CHECK(s.is_integer());
  }
  for (const auto& spec : hamiltonian_specs())
    for (int layers = 1; layers <= 3; ++layers) {
      const auto s = frequency_spectrum(spec, layers);
      CHECK(s.contains(0.0));
      for (double w : s.omegas) CHECK(s.contains(-w));
    }
}

TEST_CASE("Fourier fit of a constant model") {
  const auto omega = frequency_spectrum(EncodingSpec::pauli_parallel(2), 1);
  const auto fit = fit_fourier_coefficients([](double) { return 0.25; }, omega);
  CHECK(fit.samples == 9);
  for (const auto& [w, c] : fit.coefficients) CHECK(std::abs(c - (w == 0 ? 0.25 : 0.0)) < 1e-15);
  CHECK_THROWS_AS(fit_fourier_coefficients([](double) { return 0.0; }, omega, 4), Error);
  FrequencySpectrum frac{{-0.5, 0, 0.5}};
  try {
    fit_fourier_coefficients([](double) { return 0.0; }, frac);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAliasedSpectrum);
  }
}

TEST_CASE("single-qubit model is a shifted sinusoid") {
  Rng rng(21);
  const auto spec = EncodingSpec::hamiltonian(CMatrix(), 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = EncodedModel::random(spec, 1, rng);
    const auto fit = fit_fourier_coefficients(model, frequency_spectrum(spec, 1));
    CHECK(fit.off_spectrum_power < 1e-8);
    const Complex c2 = fit.coefficients.at(2);
    CHECK(std::abs(fit.coefficients.at(-2) - std::conj(c2)) < 1e-8);
    CHECK(std::abs(fit.coefficients.at(0).imag()) < 1e-8);
    const double a = 2 * std::abs(c2);
    const double b = std::arg(c2) + kPi / 2;
    const double c = fit.coefficients.at(0).real();
    for (int k = 0; k < 10; ++k) {
      const double x = rng.uniform(0, 2 * kPi);
      CHECK(std::abs(model(x) - (a * std::sin(2 * x + b) + c)) < 1e-10);
    }
  }
}

TEST_CASE("exponential encoding model puts all power on nine frequencies") {
  Rng rng(8);
  const auto spec = EncodingSpec::exponential(2, 3);
  const auto omega = frequency_spectrum(spec, 1);
  REQUIRE(omega.omegas.size() == 9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = EncodedModel::random(spec, 1, rng);
    const auto fit = fit_fourier_coefficients(model, omega, 101);
    CHECK(fit.coefficients.size() == 9);
    CHECK(fit.off_spectrum_power < 1e-8);
    CHECK(fit.max_residual < 1e-8);
    for (const auto& [w, c] : fit.coefficients) CHECK(std::abs(fit.coefficients.at(-w) - std::conj(c)) < 1e-8);
  }
}

TEST_CASE("deep trainable blocks never leave the spectrum") {
  Rng rng(99);
  const auto spec = EncodingSpec::hamiltonian(CMatrix(), 1.0);
  const auto omega = frequency_spectrum(spec, 1);
  for (int depth : {1, 5, 50}) {
    const auto model = EncodedModel::random(spec, 1, rng, depth);
    const auto fit = fit_fourier_coefficients(model, omega, 41);
    CHECK(fit.off_spectrum_power < 1e-8);
  }
  for (const auto& s : hamiltonian_specs()) {
    const auto model = EncodedModel::random(s, 2, rng, 3);
    const auto om = frequency_spectrum(s, 2);
    if (!om.is_integer()) continue;
    const auto fit = fit_fourier_coefficients(model, om);
    CHECK(fit.off_spectrum_power < 1e-8);
    CHECK(fit.max_residual < 1e-8);
  }
}

TEST_CASE("kernel closed forms for each encoding") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    // basis: Kronecker delta
    std::vector<double> bx(4), by(4);
    for (int i = 0; i < 4; ++i) {
      bx[i] = static_cast<double>(rng.below(2));
      by[i] = static_cast<double>(rng.below(2));
    }
    const auto spec_b = EncodingSpec::basis(0);
    CHECK(std::abs(pure_kernel(encode_state(spec_b, bx), encode_state(spec_b, by)) - (bx == by ? 1.0 : 0.0)) <
          1e-10);

    // amplitude and its repeated form
    std::vector<double> x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    const Eigen::Map<const RVector> xv(x.data(), 3), yv(y.data(), 3);
    const double ov = xv.normalized().dot(yv.normalized());
    for (int r = 1; r <= 3; ++r) {
      const auto spec = EncodingSpec::amplitude(r);
      CHECK(std::abs(pure_kernel(encode_state(spec, x), encode_state(spec, y)) - std::pow(ov * ov, r)) < 1e-10);
    }

    // phase
    std::vector<double> px(2), py(2);
    double expect = 1;
    for (int i = 0; i < 2; ++i) {
      px[i] = rng.uniform(0, 2 * kPi);
      py[i] = rng.uniform(0, 2 * kPi);
      expect *= std::pow(std::cos(px[i] - py[i]), 2);
    }
    CHECK(std::abs(pure_kernel(encode_state(EncodingSpec::phase(), px), encode_state(EncodingSpec::phase(), py)) -
                   expect) < 1e-10);
  }
  // Integer fields in basis encoding.
  const auto wide = encode_state(EncodingSpec::basis(2), std::vector<double>{2, 1});
  CHECK(std::abs(wide[0b1001] - 1.0) < 1e-15);
}

TEST_CASE("encoding spec JSON round trip") {
  for (const auto& s : hamiltonian_specs()) {
    const auto back = EncodingSpec::from_json(s.to_json());
    CHECK(back.kind == s.kind);
    CHECK(back.to_json() == s.to_json());
    CHECK(max_abs(encoding_unitary(back, 0.4).matrix() - encoding_unitary(s, 0.4).matrix()) < 1e-15);
  }
  CHECK(EncodingSpec::from_json(R"({"kind":"basis","width":3})").width == 3);
  CHECK_THROWS_AS(EncodingSpec::from_json(R"({"kind":"exponential","qubits":2,"base":1})"), Error);
  CHECK_THROWS_AS(EncodingSpec::from_json(R"({"kind":"nope"})"), Error);
  CHECK_THROWS_AS(EncodingSpec::from_json("{"), Error);
}
