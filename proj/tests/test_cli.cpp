#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unistd.h>

#include "powerfree/cli.hpp"

using namespace powerfree;
namespace fs = std::filesystem;

namespace {

const std::string kProblems = POWERFREE_PROBLEM_DIR;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_argv(std::vector<std::string> args) {
  args.insert(args.begin(), "powerfree");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

cli::RunConfig config(const std::string& command, const std::string& problem) {
  cli::RunConfig c;
  c.command = command;
  c.problem = kProblems + "/" + problem;
  return c;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("powerfree-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("compare flags the local-global failure") {
  auto c = config("compare", "borovoi_rudnick.json");
  c.H_list = {100, 500};
  const auto doc = nlohmann::json::parse(cli::render(c));
  CHECK(doc["result"]["local_global_failure"] == true);
  for (const auto& row : doc["result"]["rows"]) {
    CHECK(row["N_r"] == 0);
    CHECK(row["prediction"].get<double>() > 0);
  }
  CHECK(doc["config"]["problem_sha256"].get<std::string>().size() == 64);
  CHECK_FALSE(doc["config"].contains("workers"));
  CHECK_FALSE(doc["config"].contains("out"));
}

TEST_CASE("outputs do not depend on the worker count") {
  for (const std::string command : {"compare", "series", "sieve", "density-real", "lattice-diag"}) {
    auto c = config(command, "ternary_x2_y2_2z2.json");
    c.H = 40;
    c.H_list = {30, 60};
    c.pmax = 60;
    c.samples = 20000;
    std::string first;
    for (unsigned w : {1u, 4u, 8u}) {
      c.workers = w;
      const std::string out = cli::render(c);
      if (first.empty()) first = out;
      CHECK_MESSAGE(out == first, command);
    }
  }
}

TEST_CASE("csv carries the config and hash in comment lines") {
  auto c = config("count-rfree", "ternary_x2_y2_2z2.json");
  c.H_list = {10, 20};
  c.format = "csv";
  const std::string out = cli::render(c);
  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# tool=", 0) == 0);
  std::getline(lines, line);
  CHECK(line.rfind("# config={", 0) == 0);
  std::getline(lines, line);
  CHECK(line.rfind("# problem_sha256=", 0) == 0);
  std::getline(lines, line);
  CHECK(line == "H,points,N_r");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  const auto out = (tmp.path / "result.json").string();
  const std::string br = kProblems + "/borovoi_rudnick.json";

  CHECK(run_argv({"validate", "--problem", br, "--out", out}) == cli::kOk);
  CHECK(fs::exists(out));
  CHECK(nlohmann::json::parse(slurp(out))["result"]["valid"] == true);

  CHECK(run_argv({"enumerate", "--problem", tmp.path.string() + "/missing.json", "--H", "3"}) == cli::kValidation);
  CHECK(run_argv({"enumerate", "--problem", br, "--H", "-1"}) == cli::kValidation);
  CHECK(run_argv({"enumerate", "--problem", br}) == cli::kValidation);
  CHECK(run_argv({"rho", "--problem", br, "--ell", "0"}) == cli::kValidation);
  CHECK(run_argv({"compare", "--problem", br, "--H-list", "10,x"}) == cli::kValidation);
  CHECK(run_argv({"nonsense"}) == cli::kValidation);

  // A budget failure leaves no file behind, not even a temporary one.
  const auto big = (tmp.path / "big.json").string();
  CHECK(run_argv({"enumerate", "--problem", br, "--H", "3000", "--budget", "1000", "--out", big}) == cli::kBudget);
  CHECK_FALSE(fs::exists(big));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path)) ++files;
  CHECK(files == 1);
}

TEST_CASE("invalid quadric is reported by validate and rejected elsewhere") {
  TempDir tmp;
  const auto path = tmp.path / "degenerate.json";
  std::ofstream(path) << R"({"n": 3, "Q": {"a_ij": [[1, 1, 1], [2, 2, 1]]}, "m": 1, "r": 2,
                             "f": {"monomials": [[[1, 0, 0], 1]]}})";
  cli::RunConfig c;
  c.problem = path.string();
  c.command = "validate";
  std::ostringstream sink, log;
  CHECK(cli::run(c, sink, log) == cli::kValidation);
  CHECK(nlohmann::json::parse(sink.str())["result"]["valid"] == false);
  c.command = "count-rfree";
  c.H = 5;
  CHECK(cli::run(c, sink, log) == cli::kValidation);
}

TEST_CASE("rerunning overwrites atomically with identical bytes") {
  TempDir tmp;
  auto c = config("series", "quaternary_x4.json");
  c.pmax = 30;
  c.out = (tmp.path / "series.json").string();
  std::ostringstream sink, log;
  REQUIRE(cli::run(c, sink, log) == cli::kOk);
  const std::string first = slurp(c.out);
  REQUIRE(cli::run(c, sink, log) == cli::kOk);
  CHECK(slurp(c.out) == first);
  CHECK(first == cli::render(c));
}
