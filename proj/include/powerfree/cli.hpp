#pragma once

// The powerfree command-line tool as a library, so tests can drive it
// without spawning processes.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "powerfree/parallel.hpp"

namespace powerfree::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kBudget = 2,
  kInvariant = 3,
};

struct RunConfig {
  std::string problem;
  std::string command;
  std::optional<std::int64_t> H;
  std::vector<std::int64_t> H_list;
  std::optional<int> r;  // defaults to the problem's r
  std::optional<long double> delta;
  std::uint64_t pmax = 97;
  unsigned workers = 1;
  std::uint64_t budget = kDefaultBudget;
  std::optional<std::uint64_t> seed;  // defaults to a value derived from the problem hash
  std::string out;                    // empty: standard output
  std::string format = "json";

  // Subcommand-specific.
  std::optional<std::uint64_t> ell;
  std::optional<std::uint64_t> p;
  std::vector<std::int64_t> c;
  std::vector<std::int64_t> xi;
  int j = 1;
  std::uint64_t k_max = 50;
  int depth = 4;
  std::string method = "fiber";
  std::optional<int> component;
  long double eps = 0.25L;
  std::uint64_t samples = 1'000'000;
  std::vector<int> r_list;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"enumerate", "count-rfree", "rho",     "density-p",
                                              "density-real", "series",    "sieve",   "compare",
                                              "mq-count",  "lattice-diag", "validate", "profile"};
  return names;
}

/// Runs one subcommand and writes its artifact. Diagnostics go to `log`.
/// When `out` is empty the artifact is written to `stdout_sink`.
int run(const RunConfig& config, std::ostream& stdout_sink, std::ostream& log);

/// Renders the artifact without writing it; used by run() and by tests that
/// compare outputs byte for byte. Throws the library's exceptions.
std::string render(const RunConfig& config);

/// Maps an in-flight exception to an exit code and a message.
int exit_code_for_current_exception(std::ostream& log);

/// Parses argv with CLI11 and calls run().
int main(int argc, char** argv);

}  // namespace powerfree::cli
