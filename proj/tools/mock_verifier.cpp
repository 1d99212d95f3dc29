// Stand-in verifier for tests. Looks up the outcome for (program, flags) in a
// mock table, sleeps for the scripted delay and prints the verdict banner.
//
//   metatune-mock-verifier --table T [--grid G] [verifier flags...] program
//
// `-p X`, `--arch X`, `--32` and `--64` are accepted and ignored.

#include "metatune/backend.hpp"
#include "metatune/flags.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

int main(int argc, char **argv) {
  using namespace metatune;
  std::string table_path, grid_path;
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--table" || a == "--grid" || a == "-p" || a == "--arch") && i + 1 < argc) {
      if (a == "--table")
        table_path = argv[i + 1];
      else if (a == "--grid")
        grid_path = argv[i + 1];
      ++i;
    } else if (a != "--32" && a != "--64") {
      rest.push_back(a);
    }
  }
  try {
    std::vector<std::string> positional;
    const auto config = parse_flag_args(rest, {}, &positional);
    if (table_path.empty() || positional.empty()) {
      std::cerr << "usage: metatune-mock-verifier --table T [--grid G] [flags...] program\n";
      return 2;
    }
    const auto table = MockTable::read_file(table_path);
    const auto grid = grid_path.empty() ? canonical_grid() : read_grid_file(grid_path);
    const auto program = std::filesystem::path(positional.back()).filename().string();
    const auto outcome = table.lookup(program, config, grid.index_of(config));

    std::cout << "mock verifier: " << program << '\n' << std::flush;
    double delay = outcome.delay_s;
    if (outcome.verdict == RawVerdict::Timeout && delay <= 0.0)
      delay = 3600.0;
    std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    if (outcome.verdict == RawVerdict::Error || outcome.verdict == RawVerdict::Timeout) {
      std::cerr << "mock verifier: internal error\n";
      return 6;
    }
    std::cout << verdict_banner(outcome.verdict) << '\n';
    return 0;
  } catch (const std::exception &e) {
    std::cerr << "mock verifier: " << e.what() << '\n';
    return 2;
  }
}
