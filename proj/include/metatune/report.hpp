#pragma once

#include "metatune/campaign.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metatune {

struct BucketCounts {
  std::size_t correct = 0;             // correct and confirmed
  std::size_t correct_unconfirmed = 0; // correct, witness not confirmed
  std::size_t incorrect = 0;
  std::size_t unknown = 0;             // includes backend errors
  std::size_t timeout = 0;

  std::size_t total() const { return correct + correct_unconfirmed + incorrect + unknown + timeout; }
  /// All correct answers, confirmed or not.
  std::size_t all_correct() const { return correct + correct_unconfirmed; }
};

struct BenchmarkComparison {
  std::string bench;
  VerdictKind baseline;
  VerdictKind predicted;
};

struct ComparisonReport {
  BucketCounts baseline;
  BucketCounts predicted;
  std::vector<BenchmarkComparison> per_benchmark;

  /// (predicted correct - baseline correct) / baseline correct, as a
  /// percentage; empty when the baseline has no correct results.
  std::optional<double> improvement_percent() const;
};

std::optional<double> improvement_percent(std::size_t baseline_correct, std::size_t predicted_correct);

/// Witness status per benchmark id; `false` marks a correct result whose
/// witness was not confirmed.
using WitnessStatus = std::map<std::string, bool>;

/// Compares one row per benchmark from each dataset. Throws
/// BenchmarkMismatch when the benchmark sets differ or a benchmark repeats.
ComparisonReport report_compare(const std::vector<DatasetRow> &baseline, const std::vector<DatasetRow> &predicted,
                                const WitnessStatus &baseline_witness = {},
                                const WitnessStatus &predicted_witness = {});

void print_report(std::ostream &out, const ComparisonReport &report, std::string_view baseline_name = "default",
                  std::string_view predicted_name = "predicted");
/// `tool,correct,correct_unconfirmed,incorrect,unknown,timeout` rows.
void write_report_csv(std::ostream &out, const ComparisonReport &report, std::string_view baseline_name = "default",
                      std::string_view predicted_name = "predicted");

} // namespace metatune
