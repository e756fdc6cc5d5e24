#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ptm/cli.hpp"
#include "ptm/errors.hpp"
#include "ptm/evolution.hpp"
#include "ptm/exec.hpp"
#include "ptm/lopro/elaborate.hpp"
#include "ptm/lopro/lower.hpp"
#include "ptm/lopro/parser.hpp"
#include "ptm/machine_format.hpp"
#include "ptm/network_export.hpp"

namespace py = pybind11;
using namespace ptm;

namespace {

Limits make_limits(std::optional<std::uint64_t> max_nodes, std::optional<std::uint64_t> max_depth,
                   std::optional<std::uint64_t> max_fanout, bool fatal) {
  return Limits{max_nodes, max_depth, max_fanout, fatal};
}

lopro::HlMachine compile(const std::string& source, const std::map<std::string, std::int64_t>& params,
                         bool recycle, bool expand, const std::string& filename) {
  lopro::ElaborateOptions o;
  o.params = params;
  o.recycle_tapes = recycle;
  o.expand_comparisons = expand;
  return lopro::elaborate(lopro::parse(source, filename), o);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Perceptron Turing machines: build, evaluate, compile Lopro and evolve genotypes";

  static py::exception<lopro::LoproError> lopro_error(m, "LoproError", PyExc_ValueError);
  static py::exception<BuildError> build_error(m, "BuildError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const lopro::LoproError& e) {
      py::set_error(lopro_error, e.what());
    } catch (const lopro::LoweringError& e) {
      py::set_error(lopro_error, e.what());
    } catch (const BuildError& e) {
      py::set_error(build_error, e.what());
    } catch (const ArgumentError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const FormatError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const StructuralError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<MachineSpec>(m, "Machine")
      .def_static("parse", [](const std::string& text) { return parse_machine(text); }, py::arg("text"))
      .def_static("load", &load_machine_file, py::arg("path"))
      .def("to_text", [](const MachineSpec& s) { return format_machine(s); })
      .def("save", [](const MachineSpec& s, const std::string& path) { save_machine_file(path, s); }, py::arg("path"))
      .def_property_readonly("num_states", [](const MachineSpec& s) { return s.header.num_states; })
      .def_property_readonly("num_tapes", [](const MachineSpec& s) { return s.header.tapes.size(); })
      .def_property_readonly("num_genes", [](const MachineSpec& s) { return s.program.size(); })
      .def_property_readonly("input_dims", [](const MachineSpec& s) { return s.header.dims_of(TapeRole::InputIndex); })
      .def_property_readonly("output_dims",
                             [](const MachineSpec& s) { return s.header.dims_of(TapeRole::OutputIndex); })
      .def("__repr__", [](const MachineSpec& s) {
        return "<Machine states=" + std::to_string(s.header.num_states) + " genes=" + std::to_string(s.program.size()) +
               ">";
      });

  py::class_<Network>(m, "Network")
      .def_static("load", &load_network_file, py::arg("path"))
      .def_static("from_structured", [](const std::string& text) { return import_network(text); }, py::arg("text"))
      .def_property_readonly("depth", [](const Network& n) { return n.depth; })
      .def_property_readonly("num_nodes", [](const Network& n) { return n.nodes.size(); })
      .def_property_readonly("num_links", [](const Network& n) { return n.links.size(); })
      .def_property_readonly("input_dims", [](const Network& n) { return n.input_dims; })
      .def_property_readonly("output_dims", [](const Network& n) { return n.output_dims; })
      .def_property_readonly("complete", [](const Network& n) { return n.report.complete(); })
      .def_property_readonly("skipped_cycle_links", [](const Network& n) { return n.report.skipped_cycle_links; })
      .def(
          "evaluate",
          [](const Network& n, const std::string& bits) {
            return evaluate(n, BitArray::from_string(n.input_dims, bits)).to_string();
          },
          py::arg("bits"), "Input and output bit strings put the highest row-major index first.")
      .def(
          "truth_table",
          [](const Network& n, std::size_t cap) {
            std::vector<std::pair<std::string, std::string>> rows;
            for (const auto& [in, out] : truth_table(n, cap)) rows.emplace_back(in.to_string(), out.to_string());
            return rows;
          },
          py::arg("max_input_bits") = kDefaultTruthTableCap)
      .def(
          "export", [](const Network& n, bool dot) { return export_network(n, dot ? ExportFormat::Dot : ExportFormat::Structured); },
          py::arg("dot") = false);

  m.def(
      "build",
      [](const MachineSpec& machine, std::optional<std::uint64_t> max_nodes, std::optional<std::uint64_t> max_depth,
         std::optional<std::uint64_t> max_fanout, bool fatal) {
        return build(machine, make_limits(max_nodes, max_depth, max_fanout, fatal));
      },
      py::arg("machine"), py::kw_only(), py::arg("max_nodes") = py::none(), py::arg("max_depth") = py::none(),
      py::arg("max_fanout") = py::none(), py::arg("fatal") = false);

  py::class_<lopro::HlMachine>(m, "Program")
      .def_property_readonly("num_tapes", [](const lopro::HlMachine& h) { return h.tapes.size(); })
      .def_property_readonly("num_states", [](const lopro::HlMachine& h) { return h.states.size(); })
      .def_property_readonly("input_dims", &lopro::HlMachine::input_dims)
      .def_property_readonly("output_dims", &lopro::HlMachine::output_dims)
      .def("describe", &lopro::describe)
      .def("lower", &lopro::lower)
      .def(
          "build",
          [](const lopro::HlMachine& h, std::optional<std::uint64_t> max_nodes, std::optional<std::uint64_t> max_depth,
             std::optional<std::uint64_t> max_fanout, bool fatal) {
            return lopro::build_highlevel(h, make_limits(max_nodes, max_depth, max_fanout, fatal));
          },
          py::kw_only(), py::arg("max_nodes") = py::none(), py::arg("max_depth") = py::none(),
          py::arg("max_fanout") = py::none(), py::arg("fatal") = false);

  m.def("compile_lopro", &compile, py::arg("source"), py::kw_only(),
        py::arg("params") = std::map<std::string, std::int64_t>{}, py::arg("recycle_tapes") = true,
        py::arg("expand_comparisons") = true, py::arg("filename") = "<input>");
  m.def(
      "compile_lopro_file",
      [](const std::string& path, const std::map<std::string, std::int64_t>& params, bool recycle, bool expand) {
        lopro::ElaborateOptions o;
        o.params = params;
        o.recycle_tapes = recycle;
        o.expand_comparisons = expand;
        return lopro::elaborate(lopro::parse_file(path), o);
      },
      py::arg("path"), py::kw_only(), py::arg("params") = std::map<std::string, std::int64_t>{},
      py::arg("recycle_tapes") = true, py::arg("expand_comparisons") = true);
  m.def("lopro_stdlib", [] { return std::string(lopro::stdlib_source()); });

  m.def("task_names", &task_names);
  m.def(
      "evaluate_fitness",
      [](const MachineSpec& g, const std::string& task, std::uint64_t n) {
        return evaluate_fitness(g, make_task(task, n), EvolutionConfig{}.limits);
      },
      py::arg("genotype"), py::arg("task"), py::arg("n"));
  m.def(
      "evolve",
      [](const std::string& task, std::uint64_t n, std::size_t population, std::size_t generations,
         std::uint64_t seed, std::size_t elitism, std::size_t tournament, unsigned workers,
         const std::vector<MachineSpec>& seeds) {
        EvolutionConfig c;
        c.population = population;
        c.generations = generations;
        c.seed = seed;
        c.elitism = elitism;
        c.tournament = tournament;
        c.workers = workers;
        EvolutionResult r;
        {
          py::gil_scoped_release release;
          r = evolve(c, make_task(task, n), seeds);
        }
        py::list history;
        for (const auto& s : r.history) {
          py::dict d;
          d["generation"] = s.generation;
          d["best"] = s.best;
          d["mean"] = s.mean;
          d["best_hash"] = s.best_hash;
          d["best_length"] = s.best_length;
          history.append(d);
        }
        py::dict out;
        out["best_fitness"] = r.best.fitness;
        out["best"] = r.best.genotype;
        out["history"] = history;
        return out;
      },
      py::arg("task"), py::arg("n"), py::kw_only(), py::arg("population") = 100, py::arg("generations") = 50,
      py::arg("seed") = 1, py::arg("elitism") = 1, py::arg("tournament") = 3, py::arg("workers") = 1,
      py::arg("seeds") = std::vector<MachineSpec>{});

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the ptm command line; returns (exit_code, stdout, stderr).");
}
