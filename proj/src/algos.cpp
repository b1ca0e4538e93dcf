#include "qmlab/algos.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"

namespace qmlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<int> range(int start, int count) {
  std::vector<int> v(count);
  for (int i = 0; i < count; ++i) v[i] = start + i;
  return v;
}

void apply_op(CVector& amps, int n, const Gate& g, std::initializer_list<int> targets) {
  apply_matrix(amps, n, g.matrix(), std::span<const int>(targets.begin(), targets.size()));
}

void apply_circuit(CVector& amps, int n, const Circuit& c, int offset) {
  for (const auto& op : c.ops()) {
    std::vector<int> t = op.targets;
    for (int& q : t) q += offset;
    apply_matrix(amps, n, operation_gate(op).matrix(), t);
  }
}

// Extracts the single-qubit amplitudes of `qubit` with all other qubits fixed
// to the bits of `rest` (given for the full register, qubit bit ignored).
CVector qubit_slice(const CVector& amps, int n, int qubit, std::uint64_t rest) {
  const std::uint64_t bit = std::uint64_t{1} << (n - 1 - qubit);
  CVector out(2);
  out(0) = amps(static_cast<Eigen::Index>(rest & ~bit));
  out(1) = amps(static_cast<Eigen::Index>(rest | bit));
  return out;
}

}  // namespace

Circuit bell_circuit(BellVariant v) {
  Circuit c(2);
  if (v == BellVariant::kPhiMinus || v == BellVariant::kPsiMinus) c.add("x", {0});
  c.add("h", {0}).add("cnot", {0, 1});
  if (v == BellVariant::kPsiPlus || v == BellVariant::kPsiMinus) c.add("x", {1});
  return c;
}

StateVector bell_prepare(BellVariant v) { return run_unitary(bell_circuit(v), StateVector(2)); }

namespace {

CVector teleport_prepared(const StateVector& psi) {
  require(psi.num_qubits() == 1, ErrorCode::kDimensionMismatch, "teleportation input must be one qubit");
  CVector amps = kron(psi.amplitudes(), StateVector(2).amplitudes());
  apply_op(amps, 3, gates::H(), {1});
  apply_op(amps, 3, gates::CNOT(), {1, 2});
  apply_op(amps, 3, gates::CNOT(), {0, 1});
  apply_op(amps, 3, gates::H(), {0});
  return amps;
}

TeleportResult teleport_finish(const CVector& amps, int m1, int m2) {
  const std::uint64_t rest = (static_cast<std::uint64_t>(m1) << 2) | (static_cast<std::uint64_t>(m2) << 1);
  CVector bob = qubit_slice(amps, 3, 2, rest);
  TeleportResult r;
  r.m1 = m1;
  r.m2 = m2;
  r.before_correction = StateVector::normalized(bob);
  if (m2) bob = gates::X().matrix() * bob;
  if (m1) bob = gates::Z().matrix() * bob;
  r.output = StateVector::normalized(bob);
  return r;
}

}  // namespace

TeleportResult teleport(const StateVector& psi, Rng& rng) {
  CVector amps = teleport_prepared(psi);
  const int m1 = rng.uniform() < probability_of_one(amps, 3, 0) ? 1 : 0;
  project_qubit(amps, 3, 0, m1);
  const double p2 = probability_of_one(amps, 3, 1) / amps.squaredNorm();
  const int m2 = rng.uniform() < p2 ? 1 : 0;
  project_qubit(amps, 3, 1, m2);
  return teleport_finish(amps, m1, m2);
}

TeleportResult teleport_branch(const StateVector& psi, int m1, int m2) {
  CVector amps = teleport_prepared(psi);
  project_qubit(amps, 3, 0, m1);
  project_qubit(amps, 3, 1, m2);
  return teleport_finish(amps, m1, m2);
}

OracleFunction OracleFunction::from_table(int n, std::vector<int> table) {
  require(n >= 1 && n <= 20, ErrorCode::kBadDimension, "oracle input width out of range");
  require(table.size() == (std::size_t{1} << n), ErrorCode::kBadLength, "truth table must have 2^n entries");
  for (int v : table) require(v == 0 || v == 1, ErrorCode::kInvalidArgument, "truth table entries must be 0 or 1");
  OracleFunction f;
  f.n_ = n;
  f.table_ = std::move(table);
  return f;
}

OracleFunction OracleFunction::from_function(int n, const std::function<int(std::uint64_t)>& fn) {
  std::vector<int> t(std::size_t{1} << n);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = fn(x) & 1;
  return from_table(n, std::move(t));
}

OracleFunction OracleFunction::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return from_table(j.at("n").get<int>(), j.at("table").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("oracle JSON: ") + e.what());
  }
}

std::string OracleFunction::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  j["table"] = table_;
  return j.dump();
}

std::uint64_t OracleFunction::count_ones() const {
  std::uint64_t c = 0;
  for (int v : table_) c += static_cast<std::uint64_t>(v);
  return c;
}

CMatrix OracleFunction::unitary() const {
  const Eigen::Index d = Eigen::Index{2} << n_;
  CMatrix u = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) u(i ^ static_cast<Eigen::Index>(table_[i >> 1]), i) = 1.0;
  return u;
}

void OracleFunction::apply(CVector& amps, int num_qubits, int offset) const {
  require(offset >= 0 && offset + n_ + 1 <= num_qubits, ErrorCode::kTargetOutOfRange, "oracle does not fit register");
  const int shift_y = num_qubits - 1 - (offset + n_);
  const int shift_x = shift_y + 1;
  const std::uint64_t xmask = (std::uint64_t{1} << n_) - 1;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    if ((u >> shift_y) & 1u) continue;
    const std::uint64_t x = (u >> shift_x) & xmask;
    if (table_[x]) std::swap(amps(i), amps(static_cast<Eigen::Index>(u | (std::uint64_t{1} << shift_y))));
  }
}

DJResult deutsch_jozsa(const OracleFunction& f) {
  const int n = f.num_inputs();
  const int total = n + 1;
  CVector amps = StateVector::basis(total, 1).amplitudes();
  for (int q = 0; q < total; ++q) apply_op(amps, total, gates::H(), {q});
  f.apply(amps, total);
  for (int q = 0; q < n; ++q) apply_op(amps, total, gates::H(), {q});
  const double p0 = std::norm(amps(0)) + std::norm(amps(1));
  return {p0 > 0.5 ? DJAnswer::kConstant : DJAnswer::kBalanced, p0};
}

Circuit qft_circuit(int n) {
  require(n >= 1, ErrorCode::kBadDimension, "QFT needs at least one qubit");
  Circuit c(n);
  for (int j = 0; j < n; ++j) {
    c.add("h", {j});
    for (int k = j + 1; k < n; ++k) c.add("cphase", {k, j}, kTwoPi / std::ldexp(1.0, k - j + 1));
  }
  for (int j = 0; j < n / 2; ++j) c.add("swap", {j, n - 1 - j});
  return c;
}

Circuit inverse_qft_circuit(int n) {
  const Circuit fwd = qft_circuit(n);
  Circuit c(n);
  for (auto it = fwd.ops().rbegin(); it != fwd.ops().rend(); ++it) {
    if (it->param) c.add(it->name, it->targets, -*it->param);
    else c.add(it->name, it->targets);
  }
  return c;
}

CMatrix matrix_power2(const CMatrix& u, int power) {
  CMatrix m = u;
  for (int i = 0; i < power; ++i) m = m * m;
  return m;
}

int qpe_ancilla_count(int t_bits, double epsilon) {
  require(t_bits >= 1, ErrorCode::kInvalidArgument, "t must be positive");
  require(epsilon > 0 && epsilon < 1, ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  return t_bits + static_cast<int>(std::ceil(std::log2(2.0 + 1.0 / (2.0 * epsilon)) - 1e-12));
}

namespace {

// Runs the forward estimation circuit on [register(ancillas), system].
void qpe_forward(CVector& amps, int total, int ancillas, const CMatrix& u) {
  const int s = total - ancillas;
  const auto sys = range(ancillas, s);
  for (int j = 0; j < ancillas; ++j) apply_op(amps, total, gates::H(), {j});
  CMatrix power = u;
  for (int j = ancillas - 1; j >= 0; --j) {
    const std::vector<int> ctrl{j};
    apply_controlled_matrix(amps, total, power, ctrl, sys);
    if (j > 0) power = power * power;
  }
  apply_circuit(amps, total, inverse_qft_circuit(ancillas), 0);
}

void qpe_backward(CVector& amps, int total, int ancillas, const CMatrix& u) {
  const int s = total - ancillas;
  const auto sys = range(ancillas, s);
  apply_circuit(amps, total, qft_circuit(ancillas), 0);
  std::vector<CMatrix> powers(ancillas);
  CMatrix power = u.adjoint();
  for (int j = ancillas - 1; j >= 0; --j) {
    powers[j] = power;
    if (j > 0) power = power * power;
  }
  for (int j = 0; j < ancillas; ++j) {
    const std::vector<int> ctrl{j};
    apply_controlled_matrix(amps, total, powers[j], ctrl, sys);
  }
  for (int j = 0; j < ancillas; ++j) apply_op(amps, total, gates::H(), {j});
}

}  // namespace

std::vector<double> qpe_distribution(const Gate& u, const StateVector& eigvec, int ancillas) {
  require(u.arity() == eigvec.num_qubits(), ErrorCode::kDimensionMismatch, "eigenvector width differs from U");
  require(ancillas >= 1 && ancillas + u.arity() <= 22, ErrorCode::kBadDimension, "register too large");
  const int total = ancillas + u.arity();
  CVector amps = kron(StateVector(ancillas).amplitudes(), eigvec.amplitudes());
  qpe_forward(amps, total, ancillas, u.matrix());
  std::vector<double> dist(std::size_t{1} << ancillas, 0.0);
  const Eigen::Index block = Eigen::Index{1} << u.arity();
  for (Eigen::Index i = 0; i < amps.size(); ++i) dist[static_cast<std::size_t>(i / block)] += std::norm(amps(i));
  return dist;
}

Complex qpe_amplitude_closed_form(double phi, int ancillas, long l) {
  const double size = std::ldexp(1.0, ancillas);
  const double b = std::floor(size * phi);
  const double delta = phi - (b + static_cast<double>(l)) / size;
  const Complex num = 1.0 - std::polar(1.0, kTwoPi * size * delta);
  const Complex den = 1.0 - std::polar(1.0, kTwoPi * delta);
  if (std::abs(den) < 1e-14) return 1.0;
  return num / den / size;
}

QPEResult phase_estimate(const Gate& u, const StateVector& eigvec, int t_bits, double epsilon, Rng& rng) {
  require(u.arity() == eigvec.num_qubits(), ErrorCode::kDimensionMismatch, "eigenvector width differs from U");
  const CVector uv = u.matrix() * eigvec.amplitudes();
  const Complex lambda = eigvec.amplitudes().dot(uv);
  require((uv - lambda * eigvec.amplitudes()).norm() <= 1e-8, ErrorCode::kNotAnEigenvector,
          "input is not an eigenvector of U");
  double phi = std::arg(lambda) / kTwoPi;
  if (phi < 0) phi += 1.0;
  if (phi >= 1.0) phi -= 1.0;

  QPEResult r;
  r.true_phase = phi;
  r.ancilla_qubits = qpe_ancilla_count(t_bits, epsilon);
  r.distribution = qpe_distribution(u, eigvec, r.ancilla_qubits);
  const double size = std::ldexp(1.0, r.ancilla_qubits);
  const double tol = std::ldexp(1.0, -t_bits);
  for (std::size_t m = 0; m < r.distribution.size(); ++m) {
    double d = std::abs(static_cast<double>(m) / size - phi);
    d = std::min(d, 1.0 - d);
    if (d <= tol + 1e-15) r.success_probability += r.distribution[m];
  }
  r.register_value = sample_index(r.distribution, rng);
  r.phase_estimate = static_cast<double>(r.register_value) / size;
  r.register_bits.resize(static_cast<std::size_t>(r.ancilla_qubits));
  for (int j = 0; j < r.ancilla_qubits; ++j)
    r.register_bits[static_cast<std::size_t>(j)] = ((r.register_value >> (r.ancilla_qubits - 1 - j)) & 1u) ? '1' : '0';
  return r;
}

int grover_iterations(std::uint64_t n_items, std::uint64_t n_solutions) {
  require(n_solutions >= 1, ErrorCode::kNoSolutions, "search has no solutions");
  require(n_solutions < n_items, ErrorCode::kAllSolutions, "every item is a solution");
  return static_cast<int>(std::floor(std::numbers::pi / 4.0 * std::sqrt(static_cast<double>(n_items) / n_solutions)));
}

double grover_success_closed_form(std::uint64_t n_items, std::uint64_t n_solutions, int iterations) {
  const double theta = 2.0 * std::asin(std::sqrt(static_cast<double>(n_solutions) / n_items));
  const double s = std::sin((2.0 * iterations + 1.0) * theta / 2.0);
  return s * s;
}

GroverResult grover(const OracleFunction& f, Rng& rng) {
  const int n = f.num_inputs();
  const std::uint64_t items = std::uint64_t{1} << n;
  GroverResult r;
  r.solutions = f.count_ones();
  r.iterations = grover_iterations(items, r.solutions);
  r.success_closed_form = grover_success_closed_form(items, r.solutions, r.iterations);

  const int total = n + 1;
  CVector amps = StateVector::basis(total, 1).amplitudes();
  for (int q = 0; q < total; ++q) apply_op(amps, total, gates::H(), {q});
  const auto ctrls = range(0, n - 1);
  const std::vector<int> last{n - 1};
  for (int k = 0; k < r.iterations; ++k) {
    f.apply(amps, total);
    for (int q = 0; q < n; ++q) apply_op(amps, total, gates::H(), {q});
    for (int q = 0; q < n; ++q) apply_op(amps, total, gates::X(), {q});
    apply_controlled_matrix(amps, total, gates::Z().matrix(), ctrls, last);
    for (int q = 0; q < n; ++q) apply_op(amps, total, gates::X(), {q});
    for (int q = 0; q < n; ++q) apply_op(amps, total, gates::H(), {q});
  }
  std::vector<double> marginal(items, 0.0);
  for (Eigen::Index i = 0; i < amps.size(); ++i) marginal[static_cast<std::size_t>(i >> 1)] += std::norm(amps(i));
  for (std::uint64_t x = 0; x < items; ++x)
    if (f(x)) r.success_simulated += marginal[x];
  r.sample = sample_index(marginal, rng);
  return r;
}

TraceEstimate dqc1_trace(const Gate& u, int shots, Rng& rng) {
  require(shots > 0, ErrorCode::kInvalidArgument, "shots must be positive");
  const int m = u.arity();
  const int total = m + 1;
  const std::uint64_t dim = std::uint64_t{1} << m;
  const auto sys = range(1, m);
  const std::vector<int> ctrl{0};
  // Exact clean-qubit P(1) for each register basis state and both variants.
  std::vector<double> p1_re(dim), p1_im(dim);
  for (std::uint64_t k = 0; k < dim; ++k) {
    for (int variant = 0; variant < 2; ++variant) {
      CVector amps = StateVector::basis(total, k).amplitudes();
      apply_op(amps, total, gates::H(), {0});
      if (variant == 1) apply_op(amps, total, gates::Sdg(), {0});
      apply_controlled_matrix(amps, total, u.matrix(), ctrl, sys);
      apply_op(amps, total, gates::H(), {0});
      (variant == 0 ? p1_re : p1_im)[k] = probability_of_one(amps, total, 0);
    }
  }
  auto run_shots = [&](const std::vector<double>& p1) {
    long sum = 0;
    for (int s = 0; s < shots; ++s) {
      const std::uint64_t k = rng.below(dim);
      sum += rng.uniform() < p1[k] ? -1 : 1;
    }
    return static_cast<double>(sum) / shots;
  };
  TraceEstimate r;
  const double re = run_shots(p1_re);
  const double im = run_shots(p1_im);
  r.estimate = Complex(re, im);
  r.stderr_re = std::sqrt(std::max(1.0 - re * re, 0.0) / shots);
  r.stderr_im = std::sqrt(std::max(1.0 - im * im, 0.0) / shots);
  r.exact = u.matrix().trace() / static_cast<double>(dim);
  return r;
}

OverlapEstimate overlap_test(const StateVector& x, const StateVector& y, int shots, Rng& rng) {
  require(x.num_qubits() == y.num_qubits(), ErrorCode::kDimensionMismatch, "overlap test needs equal widths");
  require(shots > 0, ErrorCode::kInvalidArgument, "shots must be positive");
  const int m = x.num_qubits();
  const int total = 2 * m + 1;
  CVector amps = kron(StateVector(1).amplitudes(), kron(x.amplitudes(), y.amplitudes()));
  apply_op(amps, total, gates::H(), {0});
  const std::vector<int> ctrl{0};
  for (int i = 0; i < m; ++i) {
    const std::vector<int> pair{1 + i, 1 + m + i};
    apply_controlled_matrix(amps, total, gates::SWAP().matrix(), ctrl, pair);
  }
  apply_op(amps, total, gates::H(), {0});
  const double p0 = 1.0 - probability_of_one(amps, total, 0);
  long zeros = 0;
  for (int s = 0; s < shots; ++s) zeros += rng.uniform() < p0 ? 1 : 0;
  const double phat = static_cast<double>(zeros) / shots;
  OverlapEstimate r;
  r.estimate = 2.0 * phat - 1.0;
  r.stderr = 2.0 * std::sqrt(phat * (1 - phat) / shots);
  r.exact = x.fidelity(y);
  return r;
}

namespace {

LinearProtocolResult qpe_linear(const CMatrix& a, const StateVector& x, int bits,
                                const std::function<double(std::uint64_t)>& flag_amplitude) {
  require(bits >= 1 && bits <= 14, ErrorCode::kInvalidArgument, "phase register width out of range");
  const int s = x.num_qubits();
  const int total = 1 + bits + s;
  require(total <= 22, ErrorCode::kBadDimension, "protocol register too large");
  const CMatrix u = exp_hermitian(a, -kTwoPi);  // e^{2πiA}

  CVector amps = kron(StateVector(1 + bits).amplitudes(), x.amplitudes());
  // The register occupies qubits 1..bits; run the estimation on that slice by
  // treating the flag qubit as an untouched leading factor.
  {
    const std::uint64_t half = std::uint64_t{1} << (bits + s);
    CVector lower = amps.head(static_cast<Eigen::Index>(half));
    qpe_forward(lower, bits + s, bits, u);
    amps.head(static_cast<Eigen::Index>(half)) = lower;
  }
  // Multiplexed flag rotation conditioned on the register value.
  const std::uint64_t half = std::uint64_t{1} << (bits + s);
  for (std::uint64_t i = 0; i < half; ++i) {
    const std::uint64_t m = i >> s;
    const double f = flag_amplitude(m);
    const double c = std::sqrt(std::max(0.0, 1.0 - f * f));
    const Complex a0 = amps(static_cast<Eigen::Index>(i));
    const Complex a1 = amps(static_cast<Eigen::Index>(i + half));
    amps(static_cast<Eigen::Index>(i)) = c * a0 - f * a1;
    amps(static_cast<Eigen::Index>(i + half)) = f * a0 + c * a1;
  }
  CVector flagged = amps.tail(static_cast<Eigen::Index>(half));
  qpe_backward(flagged, bits + s, bits, u);

  LinearProtocolResult r;
  r.phase_bits = bits;
  r.p_acc = flagged.squaredNorm();
  require(r.p_acc >= 1e-12, ErrorCode::kPostselectionImpossible, "acceptance probability vanishes");
  const CVector sys = flagged.head(Eigen::Index{1} << s);
  r.register_residual = 1.0 - sys.squaredNorm() / r.p_acc;
  r.output = StateVector::normalized(sys);
  return r;
}

RVector checked_spectrum(const CMatrix& a, const StateVector& x) {
  require(a.rows() == static_cast<Eigen::Index>(x.dim()) && a.cols() == a.rows(), ErrorCode::kDimensionMismatch,
          "matrix size does not match the input state");
  require(is_hermitian(a, 1e-10), ErrorCode::kNotHermitian, "matrix must be Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

LinearProtocolResult qpe_matrix_multiply(const CMatrix& a, const StateVector& x, int phase_bits) {
  const RVector ev = checked_spectrum(a, x);
  require(ev.minCoeff() >= -1e-12 && ev.maxCoeff() < 1.0, ErrorCode::kInvalidArgument,
          "eigenvalues must lie in [0, 1)");
  const double size = std::ldexp(1.0, phase_bits);
  return qpe_linear(a, x, phase_bits, [size](std::uint64_t m) { return static_cast<double>(m) / size; });
}

LinearProtocolResult qpe_matrix_invert(const CMatrix& a, const StateVector& x, double c, int phase_bits) {
  const RVector ev = checked_spectrum(a, x);
  require(ev.cwiseAbs().minCoeff() > 1e-12, ErrorCode::kSingularMatrix, "matrix is singular");
  require(ev.minCoeff() > 0 && ev.maxCoeff() <= 1.0 + 1e-12, ErrorCode::kInvalidArgument,
          "eigenvalues must lie in (0, 1]");
  require(c > 0 && c <= ev.minCoeff() + 1e-12, ErrorCode::kInvalidArgument, "C must lie in (0, min eigenvalue]");
  const double size = std::ldexp(1.0, phase_bits);
  return qpe_linear(a, x, phase_bits, [size, c](std::uint64_t m) {
    const double lam = m == 0 ? 1.0 : static_cast<double>(m) / size;
    return std::min(1.0, c / lam);
  });
}

double LCUSpec::alpha() const {
  double s = 0;
  for (double a : alphas) s += a;
  return s;
}

LCUSpec lcu_from_pauli(const std::vector<PauliTerm>& terms) {
  LCUSpec spec;
  for (const auto& t : terms) {
    const double mag = std::abs(t.coeff);
    if (mag == 0.0) continue;
    spec.alphas.push_back(mag);
    spec.unitaries.push_back((t.coeff / mag) * pauli_matrix(t.labels));
  }
  return spec;
}

CMatrix householder_completion(const CVector& target) {
  const Eigen::Index d = target.size();
  require(d >= 1 && std::abs(target.norm() - 1.0) < 1e-10, ErrorCode::kNotNormalized, "target must be a unit vector");
  const Complex phase = std::abs(target(0)) > 0 ? target(0) / std::abs(target(0)) : Complex(1.0);
  const CVector b = target / phase;
  CVector w = -b;
  w(0) += 1.0;
  const double wn = w.squaredNorm();
  CMatrix h = CMatrix::Identity(d, d);
  if (wn > 1e-30) h -= (2.0 / wn) * (w * w.adjoint());
  return phase * h;
}

CMatrix BlockEncoding::block() const {
  const Eigen::Index s = Eigen::Index{1} << system_qubits;
  return unitary.topLeftCorner(s, s);
}

BlockEncoding lcu_block_encode(const LCUSpec& spec) {
  const std::size_t k = spec.unitaries.size();
  require(k >= 1 && spec.alphas.size() == k, ErrorCode::kDimensionMismatch, "alphas and unitaries differ in count");
  const Eigen::Index s = spec.unitaries.front().rows();
  require(is_power_of_two(static_cast<std::uint64_t>(s)), ErrorCode::kBadDimension, "unitaries must act on qubits");
  for (std::size_t i = 0; i < k; ++i) {
    require(spec.alphas[i] > 0, ErrorCode::kInvalidArgument, "LCU coefficients must be positive");
    require(spec.unitaries[i].rows() == s && spec.unitaries[i].cols() == s, ErrorCode::kDimensionMismatch,
            "unitaries differ in size");
    require(is_unitary(spec.unitaries[i], 1e-9), ErrorCode::kNotUnitary, "LCU term is not unitary");
  }
  BlockEncoding be;
  be.ancilla_qubits = index_bits(k);
  be.system_qubits = index_bits(static_cast<std::uint64_t>(s));
  be.alpha = spec.alpha();
  const Eigen::Index anc = Eigen::Index{1} << be.ancilla_qubits;
  CVector target = CVector::Zero(anc);
  for (std::size_t i = 0; i < k; ++i) target(static_cast<Eigen::Index>(i)) = std::sqrt(spec.alphas[i] / be.alpha);
  target.normalize();
  be.prep = householder_completion(target);

  auto select_block = [&](Eigen::Index i) -> CMatrix {
    return i < static_cast<Eigen::Index>(k) ? spec.unitaries[static_cast<std::size_t>(i)] : CMatrix::Identity(s, s);
  };
  be.select = CMatrix::Zero(anc * s, anc * s);
  for (Eigen::Index i = 0; i < anc; ++i) be.select.block(i * s, i * s, s, s) = select_block(i);

  // Entry (a, b) of every system block: U[(i,a),(j,b)] = (P† diag_k(U_k[a,b]) P)_ij.
  be.unitary = CMatrix::Zero(anc * s, anc * s);
  std::vector<CMatrix> blocks;
  for (Eigen::Index kk = 0; kk < anc; ++kk) blocks.push_back(select_block(kk));
  CVector diag(anc);
  for (Eigen::Index a = 0; a < s; ++a)
    for (Eigen::Index b = 0; b < s; ++b) {
      for (Eigen::Index kk = 0; kk < anc; ++kk) diag(kk) = blocks[static_cast<std::size_t>(kk)](a, b);
      const CMatrix m = be.prep.adjoint() * diag.asDiagonal() * be.prep;
      for (Eigen::Index i = 0; i < anc; ++i)
        for (Eigen::Index j = 0; j < anc; ++j) be.unitary(i * s + a, j * s + b) = m(i, j);
    }
  return be;
}

}  // namespace qmlab
