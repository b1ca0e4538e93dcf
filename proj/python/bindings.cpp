#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmlab/algos.hpp"
#include "qmlab/error.hpp"
#include "qmlab/experiments.hpp"
#include "qmlab/qprob.hpp"

namespace py = pybind11;

namespace {

py::object cell_to_py(const qmlab::ResultTable::Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return py::int_(*i);
  if (const auto* d = std::get_if<double>(&c)) return py::float_(*d);
  return py::str(std::get<std::string>(c));
}

py::dict table_to_py(const qmlab::ResultTable& t) {
  py::list rows;
  for (const auto& r : t.rows) {
    py::list row;
    for (const auto& c : r) row.append(cell_to_py(c));
    rows.append(row);
  }
  py::dict meta;
  for (const auto& [k, v] : t.metadata) meta[py::str(k)] = v;
  py::dict out;
  out["columns"] = t.columns;
  out["rows"] = rows;
  out["metadata"] = meta;
  return out;
}

qmlab::ExperimentConfig load(const std::string& text, std::optional<std::uint64_t> seed) {
  return qmlab::parse_config(text, nullptr, seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "qmlab native core";
  m.attr("__version__") = qmlab::kArtifactVersion;

  static py::exception<qmlab::Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qmlab::Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = std::string(qmlab::to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("list_experiments", [] {
    py::list out;
    for (const auto& i : qmlab::list_experiments()) {
      py::dict d;
      d["name"] = i.name;
      d["summary"] = i.summary;
      d["defaults"] = i.defaults_json;
      out.append(d);
    }
    return out;
  });

  m.def(
      "validate_config",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& d : qmlab::validate_config(text, seed))
          out.emplace_back(d.level == qmlab::Diagnostic::Level::kError ? "error" : "warning", d.message);
        return out;
      },
      py::arg("config"), py::arg("seed") = py::none(), "(level, message) pairs; empty when valid");

  m.def(
      "config_hash", [](const std::string& text, std::optional<std::uint64_t> seed) {
        return qmlab::config_hash(load(text, seed));
      },
      py::arg("config"), py::arg("seed") = py::none());

  m.def(
      "run_experiment",
      [](const std::string& text, std::optional<std::uint64_t> seed, int threads) {
        auto cfg = load(text, seed);
        if (threads > 0) cfg.threads = threads;
        qmlab::ResultTable t;
        {
          py::gil_scoped_release release;
          t = qmlab::run_experiment(cfg);
        }
        return table_to_py(t);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 0,
      "Runs a JSON config and returns {columns, rows, metadata}");

  m.def(
      "render_experiment",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<std::string> format) {
        const auto cfg = load(text, seed);
        qmlab::ResultTable t;
        {
          py::gil_scoped_release release;
          t = qmlab::run_experiment(cfg);
        }
        return qmlab::render(t, format.value_or(cfg.format));
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("format") = py::none(),
      "Same bytes as `qmlab run` for this config");

  m.def(
      "shannon_entropy",
      [](std::vector<double> p, double base) { return qmlab::shannon_entropy(qmlab::ProbVector::from(std::move(p)), base); },
      py::arg("p"), py::arg("base") = qmlab::kBits);
  m.def(
      "relative_entropy",
      [](std::vector<double> p, std::vector<double> q, double base) {
        return qmlab::relative_entropy(qmlab::ProbVector::from(std::move(p)), qmlab::ProbVector::from(std::move(q)),
                                       base);
      },
      py::arg("p"), py::arg("q"), py::arg("base") = qmlab::kBits);

  m.def("qft_unitary", [](int n) { return qmlab::qft_circuit(n).unitary(); }, py::arg("n"));
  m.def("qft_gate_count", [](int n) { return qmlab::qft_circuit(n).gate_count(); }, py::arg("n"));
  m.def("grover_iterations", &qmlab::grover_iterations, py::arg("items"), py::arg("solutions"));
  m.def("grover_success", &qmlab::grover_success_closed_form, py::arg("items"), py::arg("solutions"),
        py::arg("iterations"));
}
