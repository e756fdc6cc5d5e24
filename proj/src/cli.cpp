#include "ptm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <variant>

#include <CLI11.hpp>

#include "ptm/errors.hpp"
#include "ptm/evolution.hpp"
#include "ptm/exec.hpp"
#include "ptm/lopro/elaborate.hpp"
#include "ptm/lopro/lower.hpp"
#include "ptm/lopro/parser.hpp"
#include "ptm/machine_format.hpp"
#include "ptm/network_export.hpp"

namespace ptm::cli {
namespace {

struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LoproFlags {
  std::vector<std::string> params;
  bool no_recycle = false;
  bool no_expand = false;

  void add_to(CLI::App* app) {
    app->add_option("--param", params, "Override a Lopro param, NAME=VALUE (repeatable)");
    app->add_flag("--no-recycle", no_recycle, "Give every call instance fresh local tapes");
    app->add_flag("--no-expand", no_expand, "Keep tape-vs-constant comparisons as high-level predicates");
  }

  lopro::ElaborateOptions options() const {
    lopro::ElaborateOptions o;
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) throw UserError("--param expects NAME=VALUE, got '" + p + "'");
      try {
        std::size_t used = 0;
        const std::string value = p.substr(eq + 1);
        o.params[p.substr(0, eq)] = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::logic_error&) {
        throw UserError("--param value for '" + p.substr(0, eq) + "' is not an integer");
      }
    }
    o.recycle_tapes = !no_recycle;
    o.expand_comparisons = !no_expand;
    return o;
  }
};

struct LimitFlags {
  std::optional<std::uint64_t> max_nodes;
  std::optional<std::uint64_t> max_depth;
  std::optional<std::uint64_t> max_fanout;
  bool fatal = false;

  void add_to(CLI::App* app) {
    app->add_option("--max-nodes", max_nodes, "Stop building after this many nodes");
    app->add_option("--max-depth", max_depth, "Stop building past this depth");
    app->add_option("--max-fanout", max_fanout, "Stop building when a node gets more links");
    app->add_flag("--fatal", fatal, "Fail instead of returning a partial network when a limit is hit");
  }

  Limits limits() const { return Limits{max_nodes, max_depth, max_fanout, fatal}; }
};

using Loaded = std::variant<MachineSpec, lopro::HlMachine>;

Loaded load_machine_or_program(const std::string& path, const LoproFlags& flags) {
  const std::string text = read_text_file(path);
  if (lopro::looks_like_lopro(text)) return lopro::elaborate(lopro::parse(text, path), flags.options());
  try {
    return parse_machine(text);
  } catch (const FormatError& e) {
    throw FormatError(e.line(), e.message(), path);
  }
}

Network build_loaded(const Loaded& m, const Limits& limits) {
  if (const auto* raw = std::get_if<MachineSpec>(&m)) return build(*raw, limits);
  return lopro::build_highlevel(std::get<lopro::HlMachine>(m), limits);
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    save_text_file(path, text);
  }
}

void print_report(const Network& net, std::ostream& out) {
  const auto& r = net.report;
  std::map<std::string, std::size_t> kinds;
  std::size_t max_fanout = 0;
  for (NodeId n = 0; n < net.nodes.size(); ++n) {
    ++kinds[node_kind_name(net.nodes[n].kind)];
    max_fanout = std::max(max_fanout, net.fanout(n));
  }
  out << "nodes " << r.nodes << "\n";
  out << "links " << r.links << "\n";
  out << "depth " << net.depth << "\n";
  out << "max fanout " << max_fanout << "\n";
  out << "input dims " << format_dims(net.input_dims) << "\n";
  out << "output dims " << format_dims(net.output_dims) << "\n";
  out << "skipped cycle links " << r.skipped_cycle_links << "\n";
  out << "limit hits " << r.limit_hits << " (" << limit_kind_name(r.limit) << ")\n";
  out << "missing outputs " << r.missing_outputs << "\n";
  for (const auto& [k, n] : kinds) out << "kind " << k << " " << n << "\n";
}

Network network_from(const std::string& net_path, const std::string& machine_path, const LoproFlags& lf,
                     const LimitFlags& limits) {
  if (net_path.empty() == machine_path.empty()) throw UserError("give exactly one of --network and --machine");
  if (!net_path.empty()) return load_network_file(net_path);
  return build_loaded(load_machine_or_program(machine_path, lf), limits.limits());
}

MachineSpec load_genotype(const std::string& path, const LoproFlags& lf) {
  const Loaded m = load_machine_or_program(path, lf);
  if (const auto* raw = std::get_if<MachineSpec>(&m)) return *raw;
  return lopro::lower(std::get<lopro::HlMachine>(m));
}

int finish(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return 0;
  } catch (const lopro::LoproError& e) {
    err << e.what() << "\n";
  } catch (const lopro::LoweringError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const BuildError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const UserError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int parse_args(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? -1 : 1;  // -1: help was printed
  }
  return 0;
}

void compile_to(const std::string& src, bool lower, const std::string& output, const LoproFlags& lf,
                std::ostream& out) {
  const auto program = lopro::parse_file(src);
  const auto opts = lf.options();
  const auto hl = lopro::elaborate(program, opts);
  if (lower) {
    write_or_print(output, format_machine(lopro::lower(hl)), out);
  } else {
    write_or_print(output, lopro::bundle(program, opts.params), out);
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perceptron Turing machine toolkit", "ptm"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  LoproFlags lf;
  LimitFlags limits;

  // build
  std::string b_machine;
  std::string b_out;
  std::string b_format = "structured";
  auto* build_cmd = app.add_subcommand("build", "Build a network from a machine file or Lopro source");
  build_cmd->add_option("-m,--machine", b_machine, "Machine file or .lp source")->required();
  build_cmd->add_option("-o,--output", b_out, "Network output path (default: standard output)");
  build_cmd->add_option("--format", b_format, "structured or dot")->check(CLI::IsMember({"structured", "dot"}));
  limits.add_to(build_cmd);
  lf.add_to(build_cmd);

  // run
  std::string r_net;
  std::string r_machine;
  std::string r_input;
  bool r_table = false;
  auto* run_cmd = app.add_subcommand("run", "Evaluate a network on an input bit string");
  run_cmd->add_option("-n,--network", r_net, "Structured network file");
  run_cmd->add_option("-m,--machine", r_machine, "Machine file or .lp source, built on the fly");
  run_cmd->add_option("--input", r_input,
                      "Input bits; the first character is the highest row-major index (std::bitset order)");
  run_cmd->add_flag("--table", r_table, "Print the whole truth table instead");
  limits.add_to(run_cmd);
  lf.add_to(run_cmd);

  // evolve
  EvolutionConfig ec;
  std::string e_task = "exists";
  std::uint64_t e_n = 4;
  std::vector<std::string> e_seeds;
  std::string e_outdir;
  std::size_t e_samples = kDefaultTaskSamples;
  std::uint64_t e_sample_seed = kDefaultSampleSeed;
  bool e_verbose = false;
  LimitFlags e_limits;
  e_limits.max_nodes = ec.limits.max_nodes;
  e_limits.max_depth = ec.limits.max_depth;
  auto* evolve_cmd = app.add_subcommand("evolve", "Run the genetic algorithm on a benchmark task");
  evolve_cmd->add_option("--task", e_task, "exists, all, parity or transitive-closure")->capture_default_str();
  evolve_cmd->add_option("--n", e_n, "Input bits (vertices for transitive-closure)")->capture_default_str();
  evolve_cmd->add_option("--pop", ec.population, "Population size")->capture_default_str();
  evolve_cmd->add_option("--gens", ec.generations, "Generations after the initial one")->capture_default_str();
  evolve_cmd->add_option("--seed", ec.seed, "Master seed")->capture_default_str();
  evolve_cmd->add_option("--tournament", ec.tournament, "Tournament size")->capture_default_str();
  evolve_cmd->add_option("--elitism", ec.elitism, "Individuals copied unchanged")->capture_default_str();
  evolve_cmd->add_option("--p-point", ec.p_point, "Point mutation probability")->capture_default_str();
  evolve_cmd->add_option("--p-insert", ec.p_insert, "Gene insertion probability")->capture_default_str();
  evolve_cmd->add_option("--p-delete", ec.p_delete, "Gene deletion probability")->capture_default_str();
  evolve_cmd->add_option("--p-crossover", ec.p_crossover, "Crossover probability")->capture_default_str();
  evolve_cmd->add_option("--p-inversion", ec.p_inversion, "Inversion probability")->capture_default_str();
  evolve_cmd->add_option("--min-length", ec.min_length, "Minimum genes")->capture_default_str();
  evolve_cmd->add_option("--max-length", ec.max_length, "Maximum genes")->capture_default_str();
  evolve_cmd->add_option("--initial-length", ec.initial_length, "Maximum genes of random individuals")
      ->capture_default_str();
  evolve_cmd->add_option("--states", ec.num_states, "States of random individuals")->capture_default_str();
  evolve_cmd->add_option("--work-tapes", ec.work_tapes, "Work tapes of random individuals")->capture_default_str();
  evolve_cmd->add_option("--work-cells", ec.work_cells, "Cells per work tape")->capture_default_str();
  evolve_cmd->add_option("--samples", e_samples, "Inputs per sampled task")->capture_default_str();
  evolve_cmd->add_option("--sample-seed", e_sample_seed, "Seed of the sampled input set")->capture_default_str();
  evolve_cmd->add_option("--workers", ec.workers, "Fitness worker threads")->capture_default_str();
  evolve_cmd->add_option("--seed-genotype", e_seeds, "Genotype (machine file or .lp) placed in the first population")
      ->check(CLI::ExistingFile);
  evolve_cmd->add_option("-o,--out", e_outdir, "Directory for history.json, best.ptm and manifest.json")->required();
  evolve_cmd->add_flag("-v,--verbose", e_verbose, "Print one line per generation");
  e_limits.add_to(evolve_cmd);
  lf.add_to(evolve_cmd);

  // compile
  std::string c_src;
  std::string c_out;
  bool c_lower = false;
  auto* compile_cmd = app.add_subcommand("compile", "Compile Lopro source");
  compile_cmd->add_option("source", c_src, "Lopro source file")->required();
  compile_cmd->add_option("-o,--output", c_out, "Output path (default: standard output)");
  compile_cmd->add_flag("--lower", c_lower, "Emit raw PTM genes instead of self-contained Lopro source");
  lf.add_to(compile_cmd);

  // export
  std::string x_net;
  std::string x_machine;
  std::string x_out;
  bool x_dot = false;
  auto* export_cmd = app.add_subcommand("export", "Convert a network to structured text or DOT");
  export_cmd->add_option("-n,--network", x_net, "Structured network file");
  export_cmd->add_option("-m,--machine", x_machine, "Machine file or .lp source, built on the fly");
  export_cmd->add_option("-o,--output", x_out, "Output path (default: standard output)");
  export_cmd->add_flag("--dot", x_dot, "Graphviz DOT instead of structured text");
  limits.add_to(export_cmd);
  lf.add_to(export_cmd);

  // inspect
  std::string i_net;
  std::string i_machine;
  bool i_listing = false;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print the build report and depth");
  inspect_cmd->add_option("-n,--network", i_net, "Structured network file");
  inspect_cmd->add_option("-m,--machine", i_machine, "Machine file or .lp source, built on the fly");
  inspect_cmd->add_flag("--listing", i_listing, "Also print the elaborated instructions of a .lp source");
  limits.add_to(inspect_cmd);
  lf.add_to(inspect_cmd);

  if (const int rc = parse_args(app, args, out, err)) return rc < 0 ? 0 : rc;

  return finish(
      [&] {
        if (*build_cmd) {
          const Network net = build_loaded(load_machine_or_program(b_machine, lf), limits.limits());
          write_or_print(b_out, export_network(net, b_format == "dot" ? ExportFormat::Dot : ExportFormat::Structured),
                         out);
          if (!b_out.empty()) {
            out << "built " << net.nodes.size() << " nodes, " << net.links.size() << " links, depth " << net.depth
                << (net.report.complete() ? "" : " (stopped at a limit)") << "\n";
          }
        } else if (*run_cmd) {
          const Network net = network_from(r_net, r_machine, lf, limits);
          if (r_table) {
            for (const auto& [in, o] : truth_table(net)) out << in.to_string() << " -> " << o.to_string() << "\n";
            return;
          }
          if (!run_cmd->count("--input")) throw UserError("run needs --input or --table");
          out << evaluate(net, BitArray::from_string(net.input_dims, r_input)).to_string() << "\n";
        } else if (*evolve_cmd) {
          const Task task = make_task(e_task, e_n, e_samples, e_sample_seed);
          ec.limits = e_limits.limits();
          std::vector<Genotype> seeds;
          for (const auto& s : e_seeds) seeds.push_back(load_genotype(s, lf));
          const auto result = evolve(ec, task, seeds, [&](const GenerationStats& st) {
            if (e_verbose) {
              out << "generation " << st.generation << " best " << st.best << " mean " << st.mean << "\n";
            }
          });
          std::filesystem::create_directories(e_outdir);
          const std::filesystem::path dir(e_outdir);
          save_text_file((dir / "history.json").string(), history_json(result));
          save_machine_file((dir / "best.ptm").string(), result.best.genotype);
          save_text_file((dir / "manifest.json").string(), manifest_json(ec, task, result, e_seeds));
          out << "best fitness " << result.best.fitness << " after " << ec.generations << " generations\n";
        } else if (*compile_cmd) {
          compile_to(c_src, c_lower, c_out, lf, out);
        } else if (*export_cmd) {
          const Network net = network_from(x_net, x_machine, lf, limits);
          write_or_print(x_out, export_network(net, x_dot ? ExportFormat::Dot : ExportFormat::Structured), out);
        } else if (*inspect_cmd) {
          const Network net = network_from(i_net, i_machine, lf, limits);
          print_report(net, out);
          if (i_listing) {
            if (i_machine.empty()) throw UserError("--listing needs --machine with a .lp source");
            const Loaded m = load_machine_or_program(i_machine, lf);
            if (const auto* hl = std::get_if<lopro::HlMachine>(&m)) {
              out << lopro::describe(*hl);
            } else {
              out << format_machine(std::get<MachineSpec>(m));
            }
          }
        }
      },
      err);
}

int lopro_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lopro compiler", "lopro"};
  app.require_subcommand(1);
  LoproFlags lf;

  std::string c_src;
  std::string c_out;
  bool c_lower = false;
  auto* compile_cmd = app.add_subcommand("compile", "Compile Lopro source");
  compile_cmd->add_option("source", c_src, "Lopro source file")->required();
  compile_cmd->add_option("-o,--output", c_out, "Output path (default: standard output)");
  compile_cmd->add_flag("--lower", c_lower, "Emit raw PTM genes in the machine file format");
  lf.add_to(compile_cmd);

  std::string d_src;
  auto* describe_cmd = app.add_subcommand("describe", "Print the elaborated high-level instructions");
  describe_cmd->add_option("source", d_src, "Lopro source file")->required();
  lf.add_to(describe_cmd);

  if (const int rc = parse_args(app, args, out, err)) return rc < 0 ? 0 : rc;
  return finish(
      [&] {
        if (*compile_cmd) {
          compile_to(c_src, c_lower, c_out, lf, out);
        } else {
          out << lopro::describe(lopro::elaborate(lopro::parse_file(d_src), lf.options()));
        }
      },
      err);
}

}  // namespace ptm::cli
