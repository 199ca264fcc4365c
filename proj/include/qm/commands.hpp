#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qm {

enum ExitCode : int { exit_pass = 0, exit_property = 1, exit_reference = 2, exit_io = 3 };

struct CommandOptions {
  std::string verb;               // axioms, eval, integrate, kr, markov, render, median
  std::vector<std::string> args;  // positional names
  std::string scene;
  std::optional<std::uint64_t> seed;  // overrides the scene seed
  std::string out;                    // CSV destination (default: stdout); raster path for render
  std::optional<double> tol;
  std::optional<std::size_t> budget;
  std::size_t iterations = 12;        // markov
  std::string initial;                // markov: starting measure
  std::size_t samples = 200000;       // render
  std::size_t burn_in = 100;          // render
  int resolution = 512;               // render
};

// Runs one verb. CSV goes to `out` (or the --out file), diagnostics to
// `err`. Returns an ExitCode.
int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err);

// "%.12g" formatting used by every CSV writer.
std::string format_number(double v);

}  // namespace qm
