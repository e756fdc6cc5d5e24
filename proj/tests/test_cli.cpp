#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "ptm/cli.hpp"
#include "ptm/network_export.hpp"
#include "support/lopro_support.hpp"

using namespace ptm;
using namespace ptm::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result ptm_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

Result lopro_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::lopro_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path dir = fs::path(PTM_TEST_SCRATCH) / "cli";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("cli: compile, build and run the exists program") {
  const std::string genes = scratch("exists.ptm");
  const std::string net = scratch("exists.json");
  auto r = lopro_cli({"compile", program_path("exists.lp"), "--lower", "-o", genes});
  REQUIRE(r.code == 0);
  r = ptm_cli({"build", "-m", genes, "-o", net});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("nodes") != std::string::npos);
  r = ptm_cli({"run", "-n", net, "--input", "001101"});
  CHECK(r.code == 0);
  CHECK(r.out == "1\n");
  r = ptm_cli({"run", "-n", net, "--input", "000000"});
  CHECK(r.out == "0\n");
  r = ptm_cli({"run", "-m", program_path("exists.lp"), "--input", "001101"});
  CHECK(r.out == "1\n");
}

TEST_CASE("cli: compile without lowering bundles the source") {
  const std::string out = scratch("all_bundle.lp");
  REQUIRE(ptm_cli({"compile", program_path("all.lp"), "--param", "n=3", "-o", out}).code == 0);
  const std::string text = read_text_file(out);
  CHECK(text.find("function All") != std::string::npos);
  CHECK(text.find("import") == std::string::npos);
  const auto r = ptm_cli({"run", "-m", out, "--table"});
  CHECK(r.code == 0);
  CHECK(r.out.find("111 -> 1") != std::string::npos);
  CHECK(r.out.find("011 -> 0") != std::string::npos);
}

TEST_CASE("cli: user errors exit 1") {
  const std::string net = scratch("exists_hl.json");
  REQUIRE(ptm_cli({"build", "-m", program_path("exists.lp"), "-o", net}).code == 0);
  auto r = ptm_cli({"run", "-n", net, "--input", "0101"});
  CHECK(r.code == 1);
  CHECK(r.err.find("[6]") != std::string::npos);
  r = ptm_cli({"run", "-n", net, "--input", "00a101"});
  CHECK(r.code == 1);
  r = ptm_cli({"build", "-m", program_path("exists.lp"), "--bogus"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--bogus") != std::string::npos);
  r = ptm_cli({"build", "-m", scratch("missing.ptm")});
  CHECK(r.code == 1);
  CHECK(r.err.find("missing.ptm") != std::string::npos);
  const std::string bad = scratch("bad.ptm");
  save_text_file(bad, "ptm v1\nstates 2\ninstr 0 -> 9\n");
  r = ptm_cli({"build", "-m", bad});
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.ptm:3") != std::string::npos);
  const std::string broken = scratch("broken.lp");
  save_text_file(broken, "machine {\n  output state out();\n  out = true\n}\n");
  r = lopro_cli({"compile", broken});
  CHECK(r.code == 1);
  CHECK(r.err.find("broken.lp:3:") != std::string::npos);
  r = ptm_cli({"compile", program_path("exists.lp"), "--param", "n"});
  CHECK(r.code == 1);
  r = ptm_cli({"build", "-m", program_path("exists.lp"), "--max-nodes", "3", "--fatal"});
  CHECK(r.code == 1);
  r = lopro_cli({"compile", program_path("transitive_closure.lp"), "--lower"});
  CHECK(r.code == 1);
  CHECK(r.err.find("row_index") != std::string::npos);
}

TEST_CASE("cli: help exits 0") {
  const auto r = ptm_cli({"--help"});
  CHECK(r.code == 0);
  for (const char* cmd : {"build", "run", "evolve", "compile", "export", "inspect"}) {
    CHECK(r.out.find(cmd) != std::string::npos);
  }
  const auto e = ptm_cli({"evolve", "--help"});
  CHECK(e.code == 0);
  for (const char* flag : {"--pop", "--gens", "--seed", "--workers", "--seed-genotype", "--p-inversion"}) {
    CHECK(e.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("cli: export and inspect") {
  auto r = ptm_cli({"export", "-m", program_path("exists.lp"), "--param", "n=2", "--dot"});
  CHECK(r.code == 0);
  CHECK(r.out.find("digraph") != std::string::npos);
  r = ptm_cli({"export", "-m", program_path("exists.lp"), "--param", "n=2"});
  CHECK(r.code == 0);
  CHECK(import_network(r.out).nodes.size() > 0);
  r = ptm_cli({"inspect", "-m", program_path("transitive_closure.lp"), "--param", "vertices=2", "--listing"});
  CHECK(r.code == 0);
  CHECK(r.out.find("depth 15") != std::string::npos);
  CHECK(r.out.find("TransitiveClosure#1.path_x_to_y") != std::string::npos);
  CHECK(ptm_cli({"inspect"}).code == 1);
}

TEST_CASE("cli: evolve is deterministic") {
  const std::string a = scratch("evo_a");
  const std::string b = scratch("evo_b");
  const std::vector<std::string> common = {"evolve", "--task", "exists", "--n", "2", "--pop", "20",
                                           "--gens", "5",      "--seed", "42"};
  auto args = common;
  args.insert(args.end(), {"-o", a});
  REQUIRE(ptm_cli(args).code == 0);
  args = common;
  args.insert(args.end(), {"-o", b, "--workers", "2"});
  REQUIRE(ptm_cli(args).code == 0);
  CHECK(read_text_file(a + "/history.json") == read_text_file(b + "/history.json"));
  CHECK(read_text_file(a + "/best.ptm") == read_text_file(b + "/best.ptm"));
  CHECK(fs::exists(a + "/manifest.json"));
  const auto r = ptm_cli({"evolve", "--task", "exists", "--n", "4", "--pop", "10", "--gens", "3", "--seed-genotype",
                          program_path("exists.lp"), "--param", "n=4", "-o", scratch("evo_seeded")});
  CHECK(r.code == 0);
  CHECK(r.out.find("best fitness 1") != std::string::npos);
  CHECK(ptm_cli({"evolve", "--task", "nope", "-o", scratch("evo_x")}).code == 1);
}
