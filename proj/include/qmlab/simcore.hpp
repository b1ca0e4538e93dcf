#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmlab/state.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

class Rng;

// Unitary on `arity` qubits.
class Gate {
 public:
  Gate() = default;
  static Gate from_matrix(const CMatrix& m, std::string name = "unitary", double tol = 1e-10);

  int arity() const { return arity_; }
  const CMatrix& matrix() const { return m_; }
  const std::string& name() const { return name_; }
  Gate adjoint() const;

  static Gate unchecked(CMatrix m, std::string name);

 private:
  CMatrix m_;
  int arity_ = 0;
  std::string name_;
};

namespace gates {
Gate I();
Gate H();
Gate X();
Gate Y();
Gate Z();
Gate S();
Gate Sdg();
Gate T();
Gate RX(double theta);  // exp(-i θ X / 2)
Gate RY(double theta);
Gate RZ(double theta);
Gate Phase(double phi);  // diag(1, e^{iφ})
Gate CNOT();
Gate CZ();
Gate SWAP();
Gate CPhase(double phi);
// Adds one control qubit in front of the targets of `g`.
Gate controlled(const Gate& g);
// Kronecker product; the first gate acts on the leftmost qubits.
Gate tensor(std::initializer_list<Gate> factors);
// `name` is one of the names above (lowercase); `param` where required.
Gate by_name(const std::string& name, std::optional<double> param = std::nullopt);
}  // namespace gates

// In-place application of a k-qubit matrix to a raw amplitude vector.
void apply_matrix(CVector& amps, int num_qubits, const CMatrix& m, std::span<const int> targets);
// Same with control qubits that must all read 1.
void apply_controlled_matrix(CVector& amps, int num_qubits, const CMatrix& m,
                             std::span<const int> controls, std::span<const int> targets);

StateVector apply_gate(const StateVector& psi, const Gate& g, std::span<const int> targets);
StateVector apply_gate(const StateVector& psi, const Gate& g, std::initializer_list<int> targets);

inline int bit_of(std::uint64_t index, int qubit, int num_qubits) {
  return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1u);
}

double probability_of_one(const CVector& amps, int num_qubits, int qubit);
// Projects qubit onto `bit` without renormalizing; returns the branch probability.
double project_qubit(CVector& amps, int num_qubits, int qubit, int bit);

struct MeasureResult {
  int bit = 0;
  double probability = 0;
  StateVector collapsed;
};
MeasureResult measure(const StateVector& psi, int qubit, Rng& rng);

std::uint64_t sample_index(std::span<const double> probabilities, Rng& rng);
std::vector<std::uint64_t> sample_counts(const StateVector& psi, int shots, Rng& rng);

// Throws kNotTracePreserving when Σ K†K != I within `tol`.
DensityMatrix kraus_apply(const DensityMatrix& rho, std::span<const CMatrix> kraus, double tol = 1e-10);

DensityMatrix to_density(const StateVector& psi);

// Pauli products. `labels` has one character of IXYZ per qubit.
struct PauliTerm {
  std::string labels;
  Complex coeff{1.0, 0.0};
};

CMatrix pauli_matrix(const std::string& labels);
// Applies coeff * P to a raw amplitude vector (out-of-place result).
CVector apply_pauli(const CVector& amps, const std::string& labels);
// Expansion A = Σ c_P P with c_P = tr(P A) / 2^n; terms with |c| <= drop_tol removed.
std::vector<PauliTerm> pauli_decompose(const CMatrix& a, double drop_tol = 1e-14);

class Hamiltonian {
 public:
  Hamiltonian() = default;
  Hamiltonian(int num_qubits, std::vector<PauliTerm> terms);  // throws kNotHermitian

  int num_qubits() const { return n_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  CMatrix matrix() const;
  CVector apply(const CVector& amps) const;
  double expectation(const CVector& amps) const;

 private:
  int n_ = 0;
  std::vector<PauliTerm> terms_;
};

// (1/d) tr(A† B).
Complex hs_inner(const CMatrix& a, const CMatrix& b);

// exp(-i H t) by eigendecomposition; throws kNotHermitian.
Gate exp_hamiltonian(const CMatrix& h, double t);
CMatrix exp_hermitian(const CMatrix& h, double t);

Gate haar_random_unitary(int dim, Rng& rng);

// Straight-line circuit of named or explicit gates plus measurements.
struct Operation {
  std::string name;            // gate name, "unitary", or "measure"
  std::vector<int> targets;
  std::optional<double> param;
  std::optional<CMatrix> matrix;  // for name == "unitary"
};

bool operator==(const Operation& a, const Operation& b);

class Circuit {
 public:
  explicit Circuit(int num_qubits = 1) : n_(num_qubits) {}

  int num_qubits() const { return n_; }
  const std::vector<Operation>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

  Circuit& add(const std::string& name, std::vector<int> targets,
               std::optional<double> param = std::nullopt);
  Circuit& add_unitary(const CMatrix& m, std::vector<int> targets, const std::string& label = "unitary");
  Circuit& measure(int qubit);
  Circuit& append(const Circuit& other);

  // Unitary of a measurement-free circuit.
  CMatrix unitary() const;
  // Counts gates, excluding measurements.
  std::size_t gate_count() const;

 private:
  int n_;
  std::vector<Operation> ops_;
};

bool operator==(const Circuit& a, const Circuit& b);

Gate operation_gate(const Operation& op);

struct RunResult {
  StateVector state;
  std::vector<int> bits;  // measurement outcomes in circuit order
};
RunResult run(const Circuit& c, const StateVector& input, Rng& rng);
StateVector run_unitary(const Circuit& c, const StateVector& input);

std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);

}  // namespace qmlab
