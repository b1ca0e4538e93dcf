#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/simcore.hpp"

namespace qmlab {

bool operator==(const Operation& a, const Operation& b) {
  if (a.name != b.name || a.targets != b.targets || a.param != b.param) return false;
  if (a.matrix.has_value() != b.matrix.has_value()) return false;
  if (a.matrix && (a.matrix->rows() != b.matrix->rows() || a.matrix->cols() != b.matrix->cols() ||
                   *a.matrix != *b.matrix))
    return false;
  return true;
}

bool operator==(const Circuit& a, const Circuit& b) {
  return a.num_qubits() == b.num_qubits() && a.ops() == b.ops();
}

Circuit& Circuit::add(const std::string& name, std::vector<int> targets, std::optional<double> param) {
  const Gate g = gates::by_name(name, param);
  require(g.arity() == static_cast<int>(targets.size()), ErrorCode::kDimensionMismatch,
          "gate '" + name + "' expects " + std::to_string(g.arity()) + " targets");
  for (int t : targets)
    require(t >= 0 && t < n_, ErrorCode::kTargetOutOfRange, "target qubit outside register");
  ops_.push_back({name, std::move(targets), param, std::nullopt});
  return *this;
}

Circuit& Circuit::add_unitary(const CMatrix& m, std::vector<int> targets, const std::string& label) {
  const Gate g = Gate::from_matrix(m, label, 1e-9);
  require(g.arity() == static_cast<int>(targets.size()), ErrorCode::kDimensionMismatch,
          "matrix size does not match the number of targets");
  for (int t : targets)
    require(t >= 0 && t < n_, ErrorCode::kTargetOutOfRange, "target qubit outside register");
  ops_.push_back({"unitary", std::move(targets), std::nullopt, m});
  return *this;
}

Circuit& Circuit::measure(int qubit) {
  require(qubit >= 0 && qubit < n_, ErrorCode::kTargetOutOfRange, "measured qubit outside register");
  ops_.push_back({"measure", {qubit}, std::nullopt, std::nullopt});
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  require(other.n_ == n_, ErrorCode::kDimensionMismatch, "appended circuit has a different width");
  ops_.insert(ops_.end(), other.ops_.begin(), other.ops_.end());
  return *this;
}

std::size_t Circuit::gate_count() const {
  std::size_t c = 0;
  for (const auto& op : ops_)
    if (op.name != "measure") ++c;
  return c;
}

Gate operation_gate(const Operation& op) {
  if (op.name == "unitary") return Gate::unchecked(*op.matrix, "unitary");
  return gates::by_name(op.name, op.param);
}

CMatrix Circuit::unitary() const {
  const Eigen::Index d = Eigen::Index{1} << n_;
  CMatrix u = CMatrix::Identity(d, d);
  for (const auto& op : ops_) {
    require(op.name != "measure", ErrorCode::kInvalidArgument, "circuit with measurements has no unitary");
    const Gate g = operation_gate(op);
    for (Eigen::Index c = 0; c < d; ++c) {
      CVector col = u.col(c);
      apply_matrix(col, n_, g.matrix(), op.targets);
      u.col(c) = col;
    }
  }
  return u;
}

RunResult run(const Circuit& c, const StateVector& input, Rng& rng) {
  require(input.num_qubits() == c.num_qubits(), ErrorCode::kDimensionMismatch, "input width differs from circuit");
  CVector amps = input.amplitudes();
  std::vector<int> bits;
  for (const auto& op : c.ops()) {
    if (op.name == "measure") {
      const double p1 = probability_of_one(amps, c.num_qubits(), op.targets[0]);
      const int b = rng.uniform() < p1 ? 1 : 0;
      const double p = project_qubit(amps, c.num_qubits(), op.targets[0], b);
      amps /= std::sqrt(p);
      bits.push_back(b);
    } else {
      apply_matrix(amps, c.num_qubits(), operation_gate(op).matrix(), op.targets);
    }
  }
  return {StateVector::normalized(amps), bits};
}

StateVector run_unitary(const Circuit& c, const StateVector& input) {
  require(input.num_qubits() == c.num_qubits(), ErrorCode::kDimensionMismatch, "input width differs from circuit");
  CVector amps = input.amplitudes();
  for (const auto& op : c.ops()) {
    require(op.name != "measure", ErrorCode::kInvalidArgument, "measurement in a unitary-only run");
    apply_matrix(amps, c.num_qubits(), operation_gate(op).matrix(), op.targets);
  }
  return StateVector::normalized(amps);
}

std::string circuit_to_json(const Circuit& c) {
  nlohmann::json j;
  j["num_qubits"] = c.num_qubits();
  j["ops"] = nlohmann::json::array();
  for (const auto& op : c.ops()) {
    nlohmann::json o;
    o["name"] = op.name;
    o["targets"] = op.targets;
    if (op.param) o["param"] = *op.param;
    if (op.matrix) {
      o["dim"] = op.matrix->rows();
      nlohmann::json data = nlohmann::json::array();
      for (Eigen::Index r = 0; r < op.matrix->rows(); ++r)
        for (Eigen::Index k = 0; k < op.matrix->cols(); ++k)
          data.push_back({(*op.matrix)(r, k).real(), (*op.matrix)(r, k).imag()});
      o["matrix"] = std::move(data);
    }
    j["ops"].push_back(std::move(o));
  }
  return j.dump();
}

Circuit circuit_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("circuit JSON: ") + e.what());
  }
  try {
    Circuit c(j.at("num_qubits").get<int>());
    for (const auto& o : j.at("ops")) {
      const auto name = o.at("name").get<std::string>();
      auto targets = o.at("targets").get<std::vector<int>>();
      if (name == "measure") {
        c.measure(targets.at(0));
      } else if (name == "unitary") {
        const auto dim = o.at("dim").get<Eigen::Index>();
        CMatrix m(dim, dim);
        const auto& data = o.at("matrix");
        require(data.size() == static_cast<std::size_t>(dim * dim), ErrorCode::kBadConfig, "matrix size mismatch");
        for (Eigen::Index r = 0; r < dim; ++r)
          for (Eigen::Index k = 0; k < dim; ++k) {
            const auto& e = data[static_cast<std::size_t>(r * dim + k)];
            m(r, k) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
          }
        c.add_unitary(m, std::move(targets));
      } else {
        std::optional<double> param;
        if (o.contains("param")) param = o.at("param").get<double>();
        c.add(name, std::move(targets), param);
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("circuit JSON: ") + e.what());
  }
}

}  // namespace qmlab
