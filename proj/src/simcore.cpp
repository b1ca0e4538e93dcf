#include "qmlab/simcore.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"

namespace qmlab {

namespace {

void check_targets(int num_qubits, std::span<const int> targets) {
  for (std::size_t a = 0; a < targets.size(); ++a) {
    require(targets[a] >= 0 && targets[a] < num_qubits, ErrorCode::kTargetOutOfRange,
            "target qubit " + std::to_string(targets[a]) + " outside register");
    for (std::size_t b = a + 1; b < targets.size(); ++b)
      require(targets[a] != targets[b], ErrorCode::kTargetOutOfRange, "repeated target qubit");
  }
}

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

Gate Gate::from_matrix(const CMatrix& m, std::string name, double tol) {
  const auto dim = static_cast<std::uint64_t>(m.rows());
  require(m.rows() == m.cols() && is_power_of_two(dim), ErrorCode::kBadDimension,
          "gate matrix must be square with power-of-two size");
  require(is_unitary(m, tol), ErrorCode::kNotUnitary, "gate matrix is not unitary");
  return unchecked(m, std::move(name));
}

Gate Gate::unchecked(CMatrix m, std::string name) {
  Gate g;
  g.arity_ = index_bits(static_cast<std::uint64_t>(m.rows()));
  g.m_ = std::move(m);
  g.name_ = std::move(name);
  return g;
}

Gate Gate::adjoint() const { return unchecked(m_.adjoint(), name_ + "_dg"); }

namespace gates {

Gate I() { return Gate::unchecked(CMatrix::Identity(2, 2), "i"); }
Gate H() {
  const double r = 1.0 / std::sqrt(2.0);
  return Gate::unchecked(mat2(r, r, r, -r), "h");
}
Gate X() { return Gate::unchecked(mat2(0, 1, 1, 0), "x"); }
Gate Y() { return Gate::unchecked(mat2(0, -kI, kI, 0), "y"); }
Gate Z() { return Gate::unchecked(mat2(1, 0, 0, -1), "z"); }
Gate S() { return Gate::unchecked(mat2(1, 0, 0, kI), "s"); }
Gate Sdg() { return Gate::unchecked(mat2(1, 0, 0, -kI), "sdg"); }
Gate T() { return Gate::unchecked(mat2(1, 0, 0, std::polar(1.0, std::numbers::pi / 4)), "t"); }
Gate RX(double t) {
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  return Gate::unchecked(mat2(c, -kI * s, -kI * s, c), "rx");
}
Gate RY(double t) {
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  return Gate::unchecked(mat2(c, -s, s, c), "ry");
}
Gate RZ(double t) {
  return Gate::unchecked(mat2(std::polar(1.0, -t / 2), 0, 0, std::polar(1.0, t / 2)), "rz");
}
Gate Phase(double phi) { return Gate::unchecked(mat2(1, 0, 0, std::polar(1.0, phi)), "phase"); }

Gate controlled(const Gate& g) {
  const Eigen::Index d = g.matrix().rows();
  CMatrix m = CMatrix::Identity(2 * d, 2 * d);
  m.bottomRightCorner(d, d) = g.matrix();
  return Gate::unchecked(m, "c" + g.name());
}

Gate tensor(std::initializer_list<Gate> factors) {
  require(factors.size() > 0, ErrorCode::kDimensionMismatch, "tensor product of no gates");
  CMatrix m = CMatrix::Identity(1, 1);
  std::string name;
  for (const auto& g : factors) {
    m = kron(m, g.matrix());
    name += name.empty() ? g.name() : "*" + g.name();
  }
  return Gate::unchecked(m, name);
}

Gate CNOT() { return Gate::unchecked(controlled(X()).matrix(), "cnot"); }
Gate CZ() { return Gate::unchecked(controlled(Z()).matrix(), "cz"); }
Gate SWAP() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return Gate::unchecked(m, "swap");
}
Gate CPhase(double phi) { return Gate::unchecked(controlled(Phase(phi)).matrix(), "cphase"); }

Gate by_name(const std::string& name, std::optional<double> param) {
  auto p = [&]() {
    require(param.has_value(), ErrorCode::kInvalidArgument, "gate '" + name + "' needs a parameter");
    return *param;
  };
  if (name == "i") return I();
  if (name == "h") return H();
  if (name == "x") return X();
  if (name == "y") return Y();
  if (name == "z") return Z();
  if (name == "s") return S();
  if (name == "sdg") return Sdg();
  if (name == "t") return T();
  if (name == "rx") return RX(p());
  if (name == "ry") return RY(p());
  if (name == "rz") return RZ(p());
  if (name == "phase") return Phase(p());
  if (name == "cnot") return CNOT();
  if (name == "cz") return CZ();
  if (name == "swap") return SWAP();
  if (name == "cphase") return CPhase(p());
  fail(ErrorCode::kInvalidArgument, "unknown gate '" + name + "'");
}

}  // namespace gates

void apply_controlled_matrix(CVector& amps, int num_qubits, const CMatrix& m, std::span<const int> controls,
                             std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  require(m.rows() == (Eigen::Index{1} << k) && m.cols() == m.rows(), ErrorCode::kDimensionMismatch,
          "matrix size does not match the number of targets");
  require(amps.size() == (Eigen::Index{1} << num_qubits), ErrorCode::kDimensionMismatch,
          "amplitude vector does not match the qubit count");
  std::vector<int> all(targets.begin(), targets.end());
  all.insert(all.end(), controls.begin(), controls.end());
  check_targets(num_qubits, all);

  std::uint64_t target_mask = 0, control_mask = 0;
  const std::uint64_t sub = std::uint64_t{1} << k;
  std::vector<std::uint64_t> offsets(sub, 0);
  for (int j = 0; j < k; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << (num_qubits - 1 - targets[j]);
    target_mask |= bit;
    for (std::uint64_t s = 0; s < sub; ++s)
      if ((s >> (k - 1 - j)) & 1u) offsets[s] |= bit;
  }
  for (int c : controls) control_mask |= std::uint64_t{1} << (num_qubits - 1 - c);

  const std::uint64_t dim = std::uint64_t{1} << num_qubits;
  std::vector<Complex> in(sub), out(sub);
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    if ((base & control_mask) != control_mask) continue;
    for (std::uint64_t s = 0; s < sub; ++s) in[s] = amps(static_cast<Eigen::Index>(base | offsets[s]));
    for (std::uint64_t r = 0; r < sub; ++r) {
      Complex acc = 0;
      for (std::uint64_t c = 0; c < sub; ++c) acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      out[r] = acc;
    }
    for (std::uint64_t s = 0; s < sub; ++s) amps(static_cast<Eigen::Index>(base | offsets[s])) = out[s];
  }
}

void apply_matrix(CVector& amps, int num_qubits, const CMatrix& m, std::span<const int> targets) {
  apply_controlled_matrix(amps, num_qubits, m, {}, targets);
}

StateVector apply_gate(const StateVector& psi, const Gate& g, std::span<const int> targets) {
  require(static_cast<int>(targets.size()) == g.arity(), ErrorCode::kDimensionMismatch,
          "gate arity does not match the number of targets");
  CVector amps = psi.amplitudes();
  apply_matrix(amps, psi.num_qubits(), g.matrix(), targets);
  return StateVector::from_amplitudes(amps, 1e-8);
}

StateVector apply_gate(const StateVector& psi, const Gate& g, std::initializer_list<int> targets) {
  return apply_gate(psi, g, std::span<const int>(targets.begin(), targets.size()));
}

double probability_of_one(const CVector& amps, int num_qubits, int qubit) {
  require(qubit >= 0 && qubit < num_qubits, ErrorCode::kTargetOutOfRange, "qubit outside register");
  const std::uint64_t bit = std::uint64_t{1} << (num_qubits - 1 - qubit);
  double p = 0;
  for (Eigen::Index i = 0; i < amps.size(); ++i)
    if (static_cast<std::uint64_t>(i) & bit) p += std::norm(amps(i));
  return p;
}

double project_qubit(CVector& amps, int num_qubits, int qubit, int bit_value) {
  require(qubit >= 0 && qubit < num_qubits, ErrorCode::kTargetOutOfRange, "qubit outside register");
  const std::uint64_t bit = std::uint64_t{1} << (num_qubits - 1 - qubit);
  double p = 0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const bool one = (static_cast<std::uint64_t>(i) & bit) != 0;
    if (one != (bit_value == 1)) amps(i) = 0;
    else p += std::norm(amps(i));
  }
  return p;
}

MeasureResult measure(const StateVector& psi, int qubit, Rng& rng) {
  CVector amps = psi.amplitudes();
  const double p1 = probability_of_one(amps, psi.num_qubits(), qubit);
  const int b = rng.uniform() < p1 ? 1 : 0;
  const double p = project_qubit(amps, psi.num_qubits(), qubit, b);
  return {b, p, StateVector::normalized(amps)};
}

std::uint64_t sample_index(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // Round-off guard: last index with non-zero weight.
  for (std::size_t i = probabilities.size(); i-- > 0;)
    if (probabilities[i] > 0) return i;
  return 0;
}

std::vector<std::uint64_t> sample_counts(const StateVector& psi, int shots, Rng& rng) {
  const auto p = psi.probabilities();
  std::vector<std::uint64_t> counts(p.size(), 0);
  for (int s = 0; s < shots; ++s) ++counts[sample_index(p, rng)];
  return counts;
}

DensityMatrix kraus_apply(const DensityMatrix& rho, std::span<const CMatrix> kraus, double tol) {
  require(!kraus.empty(), ErrorCode::kNotTracePreserving, "empty Kraus set");
  const int d = rho.dim();
  CMatrix completeness = CMatrix::Zero(d, d);
  CMatrix out = CMatrix::Zero(d, d);
  for (const auto& k : kraus) {
    require(k.rows() == d && k.cols() == d, ErrorCode::kDimensionMismatch, "Kraus operator size mismatch");
    completeness += k.adjoint() * k;
    out += k * rho.matrix() * k.adjoint();
  }
  require((completeness - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() <= tol, ErrorCode::kNotTracePreserving,
          "Kraus operators do not sum to the identity");
  return DensityMatrix::from_matrix(out, 1e-8);
}

DensityMatrix to_density(const StateVector& psi) { return DensityMatrix::from_pure(psi); }

namespace {

struct PauliMasks {
  std::uint64_t x = 0, z = 0;
  int ny = 0;
};

PauliMasks pauli_masks(const std::string& labels) {
  PauliMasks pm;
  const int n = static_cast<int>(labels.size());
  for (int q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    switch (labels[q]) {
      case 'I': break;
      case 'X': pm.x |= bit; break;
      case 'Y': pm.x |= bit; pm.z |= bit; ++pm.ny; break;
      case 'Z': pm.z |= bit; break;
      default: fail(ErrorCode::kInvalidArgument, std::string("bad Pauli label '") + labels[q] + "'");
    }
  }
  return pm;
}

Complex i_power(int k) {
  switch (k & 3) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

}  // namespace

CVector apply_pauli(const CVector& amps, const std::string& labels) {
  const PauliMasks pm = pauli_masks(labels);
  require(amps.size() == (Eigen::Index{1} << labels.size()), ErrorCode::kDimensionMismatch,
          "Pauli string length does not match the state");
  const Complex base = i_power(pm.ny);
  CVector out(amps.size());
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const double sign = (std::popcount(u & pm.z) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(u ^ pm.x)) = base * sign * amps(i);
  }
  return out;
}

CMatrix pauli_matrix(const std::string& labels) {
  const Eigen::Index d = Eigen::Index{1} << labels.size();
  CMatrix m(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    CVector e = CVector::Zero(d);
    e(j) = 1;
    m.col(j) = apply_pauli(e, labels);
  }
  return m;
}

std::vector<PauliTerm> pauli_decompose(const CMatrix& a, double drop_tol) {
  const auto d = static_cast<std::uint64_t>(a.rows());
  require(a.rows() == a.cols() && is_power_of_two(d), ErrorCode::kBadDimension,
          "Pauli expansion needs a square power-of-two matrix");
  const int n = index_bits(d);
  std::vector<PauliTerm> out;
  std::uint64_t total = std::uint64_t{1} << (2 * n);
  static const char kLabels[4] = {'I', 'X', 'Y', 'Z'};
  for (std::uint64_t code = 0; code < total; ++code) {
    std::string labels(n, 'I');
    for (int q = 0; q < n; ++q) labels[q] = kLabels[(code >> (2 * (n - 1 - q))) & 3u];
    const PauliMasks pm = pauli_masks(labels);
    const Complex base = i_power(pm.ny);
    Complex tr = 0;
    for (std::uint64_t j = 0; j < d; ++j) {
      const double sign = (std::popcount(j & pm.z) & 1) ? -1.0 : 1.0;
      tr += base * sign * a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j ^ pm.x));
    }
    const Complex c = tr / static_cast<double>(d);
    if (std::abs(c) > drop_tol) out.push_back({labels, c});
  }
  return out;
}

Hamiltonian::Hamiltonian(int num_qubits, std::vector<PauliTerm> terms) : n_(num_qubits), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    require(static_cast<int>(t.labels.size()) == n_, ErrorCode::kDimensionMismatch,
            "Pauli term length does not match the qubit count");
    require(std::abs(t.coeff.imag()) <= 1e-12, ErrorCode::kNotHermitian, "Hamiltonian coefficients must be real");
    pauli_masks(t.labels);
  }
}

CMatrix Hamiltonian::matrix() const {
  const Eigen::Index d = Eigen::Index{1} << n_;
  CMatrix m = CMatrix::Zero(d, d);
  for (const auto& t : terms_) m += t.coeff * pauli_matrix(t.labels);
  return m;
}

CVector Hamiltonian::apply(const CVector& amps) const {
  CVector out = CVector::Zero(amps.size());
  for (const auto& t : terms_) out += t.coeff * apply_pauli(amps, t.labels);
  return out;
}

double Hamiltonian::expectation(const CVector& amps) const { return amps.dot(apply(amps)).real(); }

Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kDimensionMismatch, "operator sizes differ");
  return (a.adjoint() * b).trace() / static_cast<double>(a.rows());
}

CMatrix exp_hermitian(const CMatrix& h, double t) {
  require(is_hermitian(h, 1e-10), ErrorCode::kNotHermitian, "generator must be Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Gate exp_hamiltonian(const CMatrix& h, double t) {
  require(is_power_of_two(static_cast<std::uint64_t>(h.rows())), ErrorCode::kBadDimension,
          "generator size must be a power of two");
  return Gate::unchecked(exp_hermitian(h, t), "exp");
}

Gate haar_random_unitary(int dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0));
  }
  return Gate::unchecked(q, "haar");
}

}  // namespace qmlab
