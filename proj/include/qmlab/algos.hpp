#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qmlab/simcore.hpp"
#include "qmlab/state.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

class Rng;

enum class BellVariant { kPhiPlus, kPhiMinus, kPsiPlus, kPsiMinus };

Circuit bell_circuit(BellVariant v);
StateVector bell_prepare(BellVariant v);

struct TeleportResult {
  int m1 = 0;  // measurement of the input qubit
  int m2 = 0;  // measurement of the sender's half of the pair
  StateVector before_correction;  // receiver qubit for this branch
  StateVector output;             // receiver qubit after X^m2 Z^m1
};

// Teleports a single-qubit state through (|00>+|11>)/√2.
TeleportResult teleport(const StateVector& psi, Rng& rng);
// Same protocol with the measurement outcomes forced to (m1, m2).
TeleportResult teleport_branch(const StateVector& psi, int m1, int m2);

// f : {0,1}^n -> {0,1} given by its truth table; index x uses the same
// big-endian convention as basis states.
class OracleFunction {
 public:
  OracleFunction() = default;
  static OracleFunction from_table(int n, std::vector<int> table);
  static OracleFunction from_function(int n, const std::function<int(std::uint64_t)>& f);
  static OracleFunction from_json(const std::string& text);
  std::string to_json() const;

  int num_inputs() const { return n_; }
  int operator()(std::uint64_t x) const { return table_[x]; }
  const std::vector<int>& table() const { return table_; }
  std::uint64_t count_ones() const;

  // Permutation |x, y> -> |x, y xor f(x)> on n+1 qubits, y last.
  CMatrix unitary() const;
  // Applies the permutation to qubits [offset, offset + n] of a register.
  void apply(CVector& amps, int num_qubits, int offset = 0) const;

 private:
  int n_ = 0;
  std::vector<int> table_;
};

enum class DJAnswer { kConstant, kBalanced };

struct DJResult {
  DJAnswer answer = DJAnswer::kConstant;
  double p_all_zero = 0;  // probability of reading 0...0 on the input register
};

// The promise (constant or balanced) is not checked.
DJResult deutsch_jozsa(const OracleFunction& f);

Circuit qft_circuit(int n);
Circuit inverse_qft_circuit(int n);

// Matrix of U^(2^power) by repeated squaring.
CMatrix matrix_power2(const CMatrix& u, int power);

int qpe_ancilla_count(int t_bits, double epsilon);

struct QPEResult {
  double phase_estimate = 0;       // 0.b1 b2 ... bn of register_bits
  std::string register_bits;
  std::uint64_t register_value = 0;
  double success_probability = 0;  // P(circular |m/2^n - φ| <= 2^-t)
  double true_phase = 0;
  int ancilla_qubits = 0;
  std::vector<double> distribution;  // exact register distribution
};

// Register distribution of the phase-estimation circuit with `ancillas`
// qubits; qubit 0 of the register is the most significant bit.
std::vector<double> qpe_distribution(const Gate& u, const StateVector& eigvec, int ancillas);
// Closed-form amplitude of register value (b + l) mod 2^n, with b = floor(2^n φ).
Complex qpe_amplitude_closed_form(double phi, int ancillas, long l);

// Throws kNotAnEigenvector when |U v - λ v| > 1e-8.
QPEResult phase_estimate(const Gate& u, const StateVector& eigvec, int t_bits, double epsilon, Rng& rng);

int grover_iterations(std::uint64_t n_items, std::uint64_t n_solutions);
double grover_success_closed_form(std::uint64_t n_items, std::uint64_t n_solutions, int iterations);

struct GroverResult {
  int iterations = 0;
  std::uint64_t solutions = 0;
  double success_closed_form = 0;
  double success_simulated = 0;
  std::uint64_t sample = 0;
};

// Phase flips via the |-> ancilla. Throws kNoSolutions / kAllSolutions.
GroverResult grover(const OracleFunction& f, Rng& rng);

struct TraceEstimate {
  Complex estimate;
  double stderr_re = 0;
  double stderr_im = 0;
  Complex exact;
};

// Normalized trace tr U / 2^m of an m-qubit unitary from `shots` runs of the
// clean-qubit circuit for each of the real and imaginary parts.
TraceEstimate dqc1_trace(const Gate& u, int shots, Rng& rng);

struct OverlapEstimate {
  double estimate = 0;  // 2 P(0) - 1
  double stderr = 0;
  double exact = 0;     // |<x|y>|^2
};

OverlapEstimate overlap_test(const StateVector& x, const StateVector& y, int shots, Rng& rng);

struct LinearProtocolResult {
  StateVector output;          // post-selected system state
  double p_acc = 0;            // probability of the flag qubit reading 1
  double register_residual = 0;  // weight left outside |0> of the phase register
  int phase_bits = 0;
};

// Phase-estimation based multiply: eigenvalues of A must lie in [0, 1).
LinearProtocolResult qpe_matrix_multiply(const CMatrix& a, const StateVector& x, int phase_bits = 8);
// Inversion with flag amplitude C / λ; eigenvalues in (0, 1]. Register value 0
// decodes as λ = 1 since λ = 0 is excluded.
LinearProtocolResult qpe_matrix_invert(const CMatrix& a, const StateVector& x, double c, int phase_bits = 8);

struct LCUSpec {
  std::vector<double> alphas;
  std::vector<CMatrix> unitaries;
  double alpha() const;
};

// Absorbs coefficient phases into the Pauli unitaries; zero terms dropped.
LCUSpec lcu_from_pauli(const std::vector<PauliTerm>& terms);

struct BlockEncoding {
  CMatrix prep;     // on the ancilla register
  CMatrix select;   // on ancilla + system
  CMatrix unitary;  // Prep† Select Prep
  int ancilla_qubits = 0;
  int system_qubits = 0;
  double alpha = 0;
  CMatrix block() const;  // (<0|⊗I) U (|0>⊗I)
};

// Householder reflection mapping |0> to the unit vector `target` (real, or
// with arbitrary phases).
CMatrix householder_completion(const CVector& target);

BlockEncoding lcu_block_encode(const LCUSpec& spec);

}  // namespace qmlab
