#pragma once

#include <string>
#include <vector>

namespace metatune {

struct ProcessResult {
  int exit_status = -1;  // exit code, or 128 + signal when killed by a signal
  bool timed_out = false; // the supervisor killed the process group
  double wall_time_s = 0.0;
  std::string output;     // interleaved stdout and stderr
};

/// Runs `argv` in its own process group and kills the whole group once
/// `timeout_s` of wall-clock time has elapsed. Throws SpawnFailure when the
/// executable cannot be started.
ProcessResult run_process(const std::vector<std::string> &argv, double timeout_s);

} // namespace metatune
