#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

#ifndef ZNN_CLI_PATH
#error "ZNN_CLI_PATH must point at the installed command-line binary"
#endif

namespace znn {
namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  const std::string out_path = temp_file("znn_cli_out.txt");
  const std::string command =
      std::string(ZNN_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::ostringstream text;
  text << in.rdbuf();
  result.output = text.str();
  std::remove(out_path.c_str());
  return result;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

struct Cleanup {
  explicit Cleanup(std::string p) : path(std::move(p)) {}
  ~Cleanup() { std::remove(path.c_str()); }
  std::string path;
};

TEST_CASE("discover reports a convergent five-instance rule") {
  const CliResult result = run_cli("discover 2_3 --rng 1");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("convergent: yes") != std::string::npos);
  CHECK(result.output.find("catalog line: 2_3") != std::string::npos);
}

TEST_CASE("discover exhausts the budget on a hopeless family") {
  const CliResult result = run_cli("discover 2_1 --seeds 50 --rng 1");
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("no convergent 2_1 formula") != std::string::npos);
}

TEST_CASE("run traces are byte-identical across invocations") {
  const Cleanup a(temp_file("znn_trace_a.csv")), b(temp_file("znn_trace_b.csv"));
  const std::string args =
      "run --problem linsys --flow sym2 --formula 2_3 --tau 0.01 --tf 1 "
      "--rng 5 --out ";
  CHECK(run_cli(args + a.path).exit_code == 0);
  CHECK(run_cli(args + b.path).exit_code == 0);
  const std::string first = slurp(a.path);
  CHECK(first == slurp(b.path));
  CHECK(first.rfind("# problem=linsys", 0) == 0);
  CHECK(first.find("k,t,residual_fro,relative_residual,solve_condition") !=
        std::string::npos);
}

TEST_CASE("an unstable gain exits with the divergence code") {
  const CliResult result = run_cli(
      "run --problem linsys --flow sym2 --formula 2_3 --tau 0.1 --eta 30 "
      "--tf 40");
  CHECK(result.exit_code == 3);
  CHECK(result.output.find("diverged") != std::string::npos);
}

TEST_CASE("sweeps tabulate one row per requested value") {
  const Cleanup csv(temp_file("znn_sweep.csv"));
  const CliResult result = run_cli(
      "sweep --problem linsys --flow sym2 --formula 2_3 --tf 2 "
      "--vary tau --values 0.02,0.01 --out " +
      csv.path);
  CHECK(result.exit_code == 0);
  const std::string text = slurp(csv.path);
  int lines = 0;
  for (const char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 3);  // header plus two rows
  CHECK(text.find("tau,steady_residual,diverged") != std::string::npos);
}

TEST_CASE("usage errors and bad data report through exit code 1") {
  CHECK(run_cli("run --no-such-flag").exit_code == 1);
  CHECK(run_cli("run --problem nonesuch --flow sym2").exit_code == 1);
  CHECK(run_cli("run --problem linsys --flow sym2 --formula 9_9").exit_code ==
        1);
  CHECK(run_cli("").exit_code == 1);  // a subcommand is required
}

TEST_CASE("discovered formulas persist and load through a catalog file") {
  const Cleanup catalog(temp_file("znn_catalog.txt"));
  const CliResult found =
      run_cli("discover 2_2 --rng 1 --out " + catalog.path);
  REQUIRE(found.exit_code == 0);
  CHECK(slurp(catalog.path).rfind("2_2 ", 0) == 0);

  const CliResult reused = run_cli(
      "run --problem linsys --flow sym2 --formula 2_2 --tau 0.01 --tf 0.5 "
      "--catalog " +
      catalog.path);
  CHECK(reused.exit_code == 0);

  std::ofstream(catalog.path, std::ios::trunc)
      << "2_2 2 2 0.5 bogus line that cannot validate\n";
  const CliResult corrupted = run_cli(
      "run --problem linsys --flow sym2 --formula 2_2 --tau 0.01 --tf 0.5 "
      "--catalog " +
      catalog.path);
  CHECK(corrupted.exit_code == 1);
  CHECK(corrupted.output.find("error:") != std::string::npos);
}

}  // namespace
}  // namespace znn
