#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmlab/simcore.hpp"
#include "qmlab/state.hpp"

namespace qmlab {

class Rng;

// ---------------------------------------------------------------------------
// Parameterized circuits

// Affine coefficient offset + Σ w θ_j + Σ u x_f.
struct Binding {
  double offset = 0;
  std::vector<std::pair<int, double>> params;
  std::vector<std::pair<int, double>> features;

  double eval(std::span<const double> theta, std::span<const double> data) const;
  double param_weight(int j) const;
};

struct GeneratorTerm {
  std::string labels;  // one Pauli letter per qubit
  Binding coeff;
};

// Either exp(-i Σ_ν x_ν P_ν) or a fixed unitary on `targets`.
struct Layer {
  std::vector<GeneratorTerm> terms;
  std::optional<CMatrix> fixed;
  std::vector<int> targets;

  bool is_fixed() const { return fixed.has_value(); }
  bool commuting() const;
  bool depends_on_params() const;
};

bool paulis_commute(const std::string& a, const std::string& b);
// Pauli string on `n` qubits with `letter` at each listed qubit.
std::string pauli_string(int n, std::initializer_list<std::pair<int, char>> sites);

class ParamCircuit {
 public:
  explicit ParamCircuit(int num_qubits = 1) : n_(num_qubits) {}

  int num_qubits() const { return n_; }
  int num_params() const { return num_params_; }
  int num_features() const { return num_features_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }

  // exp(-i weight θ_param P).
  ParamCircuit& rotation(const std::string& labels, int param, double weight = 0.5);
  // exp(-i weight x_feature P).
  ParamCircuit& encode(const std::string& labels, int feature, double weight = 0.5);
  ParamCircuit& generator(std::vector<GeneratorTerm> terms);
  ParamCircuit& fixed(const CMatrix& u, std::vector<int> targets);
  ParamCircuit& gate(const Gate& g, std::vector<int> targets) { return fixed(g.matrix(), std::move(targets)); }
  ParamCircuit& append(const ParamCircuit& other);

  // Layer `t` applied to `amps`, optionally with `extra` added to the
  // coefficient of term `term`.
  void apply_layer(CVector& amps, std::size_t t, std::span<const double> theta, std::span<const double> data,
                   int term = -1, double extra = 0) const;
  void apply_range(CVector& amps, std::size_t begin, std::size_t end, std::span<const double> theta,
                   std::span<const double> data) const;
  CVector apply(std::span<const double> theta, const CVector& psi0, std::span<const double> data = {}) const;
  CMatrix unitary(std::span<const double> theta, std::span<const double> data = {}) const;
  // Dense Σ_ν x_ν P_ν of layer t.
  CMatrix layer_generator(std::size_t t, std::span<const double> theta, std::span<const double> data) const;

 private:
  void track(const Binding& b);
  int n_;
  int num_params_ = 0;
  int num_features_ = 0;
  std::vector<Layer> layers_;
};

// RY and RZ on every qubit followed by a CNOT chain, `depth` times, then a
// final RY layer.
ParamCircuit hardware_efficient_ansatz(int num_qubits, int depth);

using Expectation = std::function<double(const CVector&)>;
Expectation observable(const Hamiltonian& h);
Expectation observable(const CMatrix& o);

double cost_expectation(const ParamCircuit& c, std::span<const double> theta, const Hamiltonian& o,
                        const StateVector& psi0, std::span<const double> data = {});

struct GradientEstimate {
  std::vector<double> value;
  std::vector<double> std_error;
  int samples = 0;
};

// Exact ±π/4 shift rule on each coefficient, chain rule onto θ. Throws
// kUnsupportedGenerator when a parameterized layer has non-commuting terms.
GradientEstimate parameter_shift_gradient(const ParamCircuit& c, std::span<const double> theta,
                                          const Expectation& o, const CVector& psi0,
                                          std::span<const double> data = {});
GradientEstimate parameter_shift_gradient(const ParamCircuit& c, std::span<const double> theta,
                                          const Hamiltonian& o, const StateVector& psi0);

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::span<const double> theta, double step = 1e-5);

// ∂C/∂x for the coefficient x of Pauli `v` in layer `t` (x = 0 if absent),
// estimated from `samples` draws s ~ U[0,1] of C₊ − C₋ with
// U± = e^{-isX} e^{∓iπV/4} e^{-i(1-s)X}.
GradientEstimate stochastic_parameter_shift(const ParamCircuit& c, std::size_t t, const std::string& v,
                                            std::span<const double> theta, const Expectation& o,
                                            const CVector& psi0, int samples, Rng& rng,
                                            std::span<const double> data = {});
// Full θ-gradient; exact shifts on commuting layers, stochastic elsewhere.
GradientEstimate gradient(const ParamCircuit& c, std::span<const double> theta, const Expectation& o,
                          const CVector& psi0, int samples, Rng& rng, std::span<const double> data = {});

// ---------------------------------------------------------------------------
// Optimization and VQE

struct GDConfig {
  double step = 0.1;
  double momentum = 0.0;
  int max_iters = 500;
  double grad_tol = 1e-8;
  bool backtrack = true;  // reject steps that increase the objective
};

struct OptimizeResult {
  std::vector<double> theta;
  double value = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

OptimizeResult gradient_descent(const std::function<double(std::span<const double>)>& f,
                                const std::function<std::vector<double>(std::span<const double>)>& grad,
                                std::vector<double> theta0, const GDConfig& cfg);

struct VQEConfig {
  GDConfig gd{0.2, 0.5, 2000, 1e-7, true};
  int restarts = 3;
  double init_scale = 3.141592653589793;
};

struct VQEResult {
  std::vector<double> theta;
  double energy = 0;
  double exact_ground = 0;
  bool converged = false;
  int iterations = 0;
};

VQEResult vqe(const Hamiltonian& h, const ParamCircuit& ansatz, const VQEConfig& cfg, Rng& rng);
double ground_energy(const Hamiltonian& h);

// ---------------------------------------------------------------------------
// Ising, QUBO, QAOA, QBoost

struct Coupling {
  int i = 0, j = 0;
  double value = 0;
};

// E(z) = Σ J_ij z_i z_j + Σ h_i z_i + offset with z_i = 1 - 2 x_i, x_i the
// bit of qubit i. Transverse fields c add Σ c_i σ^x_i to the Hamiltonian.
struct IsingModel {
  int n = 0;
  std::vector<Coupling> couplings;
  std::vector<double> h;
  std::vector<double> c;
  double offset = 0;

  explicit IsingModel(int num_spins = 0);
  void add_coupling(int i, int j, double value);
  double energy(std::span<const int> spins) const;
  double energy_of_index(std::uint64_t index) const;
  RVector diagonal() const;  // classical energies over basis states
  Hamiltonian hamiltonian() const;
  bool has_transverse() const;
};

std::vector<int> spins_of_index(std::uint64_t index, int n);
std::uint64_t index_of_spins(std::span<const int> spins);

struct Edge {
  int u = 0, v = 0;
};

// E(z) = -cut(z).
IsingModel maxcut_to_ising(int num_vertices, std::span<const Edge> edges);
int cut_value(std::span<const Edge> edges, std::span<const int> spins);

// f(x) = xᵀQx + bᵀx + constant; E(z(x)) = f(x) on every assignment.
struct Qubo {
  RMatrix q;
  RVector b;
  double constant = 0;
  double value(std::span<const int> bits) const;
};
IsingModel qubo_to_ising(const Qubo& qubo);

struct BruteForceResult {
  double min_energy = 0;
  double max_energy = 0;
  std::vector<std::uint64_t> ground_states;
};
BruteForceResult brute_force(const IsingModel& model, double tol = 1e-9);

struct AnnealConfig {
  int sweeps = 2000;
  double t_start = 5.0;
  double t_end = 0.01;
  int restarts = 4;
};
struct AnnealResult {
  std::vector<int> spins;
  double energy = 0;
};
AnnealResult simulated_annealing(const IsingModel& model, const AnnealConfig& cfg, Rng& rng);

struct QAOAConfig {
  int p = 2;
  double ramp_time = 0.75;  // linear-ramp initial angles
  int restarts = 4;
  GDConfig gd{0.05, 0.5, 1000, 1e-8, true};
};

struct QAOAResult {
  std::vector<double> gammas, betas;
  double expected_energy = 0;
  double approx_ratio = 0;  // (E_max - <E>) / (E_max - E_min)
  std::uint64_t best_index = 0;
  std::vector<int> best_bits;
  double best_probability = 0;
  double ground_probability = 0;
};

// e^{-iβ_p H₀} e^{-iγ_p H₁} ... |+...+> with H₀ = Σ σ^x and H₁ the Ising cost.
ParamCircuit qaoa_circuit(const IsingModel& model, int p);
QAOAResult qaoa(const IsingModel& model, const QAOAConfig& cfg, Rng& rng);

struct QBoostProblem {
  int learners = 0;
  int bits = 0;
  double lambda = 0;
  Qubo qubo;  // over learners*bits variables, learner-major
  IsingModel ising;
  std::vector<double> weights(std::span<const int> bits_assignment) const;
  double loss(std::span<const int> bits_assignment) const { return qubo.value(bits_assignment); }
};

// (1/N) Σ_i (Σ_k w_k h_k(x_i) - y_i)² + λ Σ_k w_k with w_k = Σ_j 2^{-j} b_kj.
QBoostProblem qboost_objective(const RMatrix& predictions, std::span<const double> labels, double lambda,
                               int bits_per_weight = 3);
double qboost_direct_loss(const RMatrix& predictions, std::span<const double> labels, double lambda,
                          std::span<const double> weights);

// ---------------------------------------------------------------------------
// Gibbs states

// 2n-qubit purification; ancilla of qubit i is qubit n + i.
StateVector gibbs_pair_state(double temperature, int n);
DensityMatrix gibbs_pair_prepare(double temperature, int n);

struct TfimGibbs {
  DensityMatrix rho;
  std::vector<double> p;  // diagonal of rho
};
// rho = e^{-H/T} / Z.
TfimGibbs tfim_gibbs(const IsingModel& model, double temperature);
DensityMatrix gibbs_state(const CMatrix& h, double temperature);

// ---------------------------------------------------------------------------
// Barren plateaus

enum class BarrenEnsemble { kBrickwork, kGlobalHaar };
enum class BarrenObservable { kLocalZ, kGlobalProjector };

struct BarrenConfig {
  std::vector<int> qubits{2, 3, 4};
  int samples = 10000;
  BarrenEnsemble ensemble = BarrenEnsemble::kGlobalHaar;
  BarrenObservable observable = BarrenObservable::kLocalZ;
  int depth = 0;  // brickwork rows; 0 means 3n
  bool identity_generator = false;
};

struct BarrenRow {
  int n = 0;
  int depth = 0;
  int samples = 0;
  double mean = 0;
  double mean_std_error = 0;
  double variance = 0;
  double variance_std_error = 0;
  double case3_closed_form = 0;  // 2 tr H² tr ρ² (tr V²/N³ - (tr V)²/N⁴)
  double haar_exact = 0;         // finite-N Haar average
};

// ∂_θ tr(H U₊ e^{-iθV} U₋ ρ U₋† e^{iθV} U₊†) at θ = 0 with ρ = |0><0|, V = Z on qubit 0.
std::vector<BarrenRow> barren_experiment(const BarrenConfig& cfg, Rng& rng);
double barren_case3_closed_form(double tr_h2, double tr_rho2, double tr_v2, double tr_v, double dim);
double barren_haar_variance(double tr_h, double tr_h2, double tr_v, double tr_v2, double tr_rho2, double dim);
// Brickwork of Haar two-qubit gates, `rows` rows.
CMatrix brickwork_unitary(int n, int rows, Rng& rng);

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
};
SlopeFit fit_line(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Adiabatic dynamics

struct IntegratorConfig {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double initial_step = 1e-3;
};

// H(t) = [[αt/2, Δ], [Δ, -αt/2]] from -t_span to t_span; returns the
// population left in the excited adiabatic state. t_span = 0 picks
// max(100, 20 max(Δ/α, 1/Δ)).
double landau_zener(double alpha, double delta, double t_span = 0, const IntegratorConfig& cfg = {});
inline double landau_zener_closed_form(double alpha, double delta) {
  return std::exp(-2 * 3.141592653589793 * delta * delta / alpha);
}

struct AnnealSchedule {
  std::function<double(double)> lambda = [](double s) { return s; };
  double total_time = 1.0;
  static AnnealSchedule linear(double t) { return {[](double s) { return s; }, t}; }
  static AnnealSchedule quadratic(double t) { return {[](double s) { return s * s; }, t}; }
  void validate(int grid = 101) const;
};

struct AdiabaticTrace {
  std::vector<double> s;
  std::vector<double> fidelity;  // |<g(s)|ψ(s)>|²
  double min_gap = 0;
  bool gap_warning = false;
  double terminal_infidelity() const { return 1 - fidelity.back(); }
  double min_fidelity() const;
};

AdiabaticTrace adiabatic_follow(const CMatrix& h0, const CMatrix& h1, const AnnealSchedule& schedule,
                                int grid_points = 101, const IntegratorConfig& cfg = {});

struct LossSpread {
  double s = 0;
  double delta_theta = 0;
  double loss_std = 0;
};
struct AdiabaticDescentResult {
  std::vector<std::vector<double>> theta_path;
  std::vector<double> losses;
  std::vector<LossSpread> spreads;
};

// Sweeps s over `steps` values; at each does `inner_iters` descent steps on
// <H(s)> and samples `probes` points in the ±Δθ hypercube at the listed s.
AdiabaticDescentResult variational_adiabatic_descent(const ParamCircuit& c,
                                                     const std::function<Hamiltonian(double)>& h_of_s,
                                                     int steps, double lr, int inner_iters,
                                                     std::span<const double> delta_thetas,
                                                     std::span<const double> probe_s, int probes, Rng& rng);
// Std of C over θ uniform in [θ₀ - Δ, θ₀ + Δ]^P.
double loss_spread(const ParamCircuit& c, std::span<const double> theta0, const Hamiltonian& h, double delta,
                   int probes, Rng& rng);

// ---------------------------------------------------------------------------
// DQC1 model and classifier

struct Dqc1Value {
  double value = 0;
  std::vector<double> gradient;
};
// f = Re tr U(x, θ) / 2^n with gradients from the trace derivative.
Dqc1Value dqc1_model(const ParamCircuit& c, std::span<const double> x, std::span<const double> theta);

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

struct ClassifierConfig {
  GDConfig gd{0.3, 0.5, 200, 1e-7, true};
  double prob_floor = 1e-12;
};

struct ClassifierResult {
  std::vector<double> theta;
  std::vector<double> loss_history;
  double accuracy = 0;
};

// l_j = <ψ(x;θ)|Λ_j|ψ(x;θ)>; throws kIncompleteProjectors unless Σ Λ_j = I.
std::vector<double> classifier_probabilities(const ParamCircuit& c, std::span<const CMatrix> projectors,
                                             std::span<const double> x, std::span<const double> theta);
ClassifierResult variational_classifier(const ParamCircuit& c, std::span<const CMatrix> projectors,
                                        const Dataset& data, std::vector<double> theta0,
                                        const ClassifierConfig& cfg = {});
double classifier_accuracy(const ParamCircuit& c, std::span<const CMatrix> projectors, const Dataset& data,
                           std::span<const double> theta);

}  // namespace qmlab
