#pragma once

#include "metatune/backend.hpp"
#include "metatune/dtree.hpp"
#include "metatune/features.hpp"
#include "metatune/flags.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stop_token>
#include <string>
#include <utility>
#include <vector>

namespace metatune {

struct CampaignManifest {
  std::vector<BenchmarkSpec> benchmarks;
  FlagGrid grid = canonical_grid();
  double timeout_s = 180.0;
  std::size_t parallelism = 1;
};

/// `program <TAB> property <TAB> true|false|unknown` per line, `#` comments.
/// Relative paths are resolved against `base_dir`.
std::vector<BenchmarkSpec> read_manifest(std::istream &in, const std::filesystem::path &base_dir = {});
std::vector<BenchmarkSpec> read_manifest_file(const std::filesystem::path &path);

/// Benchmark id used in datasets and journals.
std::string benchmark_id(const BenchmarkSpec &bench);

/// Reads and analyses a program file; unreadable files throw Error.
ProgramFeatures features_of_file(const std::filesystem::path &path);

struct DatasetRow {
  std::string bench;
  std::size_t cfg = 0;
  ProgramFeatures features;
  EncodedFlags flags{};
  VerdictKind verdict = VerdictKind::Error;
  double time_s = 0.0;
  OutcomeClass cls;

  friend bool operator==(const DatasetRow &, const DatasetRow &) = default;
};

/// Model input: 11 program features followed by 8 encoded flags.
std::vector<double> feature_vector(const ProgramFeatures &features, const EncodedFlags &flags);

struct CampaignOptions {
  /// Checkpoint journal; completed cells found here are not re-run.
  std::filesystem::path journal;
  /// Called after every completed cell with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs every benchmark x configuration cell and returns rows in
/// benchmark-major, configuration-minor order. Throws CampaignInterrupted
/// if `stop` is requested before all cells finish, and propagates
/// SpawnFailure; in both cases the journal keeps every completed cell.
std::vector<DatasetRow> run_campaign(const CampaignManifest &manifest, const Backend &adapter,
                                     const CampaignOptions &options = {}, std::stop_token stop = {});

/// Dataset CSV with header `bench,cfg,f1..f11,g1..g8,verdict,time_s,class`.
void write_dataset(std::ostream &out, const std::vector<DatasetRow> &rows);
void write_dataset_file(const std::filesystem::path &path, const std::vector<DatasetRow> &rows);
/// Throws FormatError (row number = line number) on malformed rows or when a
/// row's class disagrees with its verdict and time.
std::vector<DatasetRow> read_dataset(std::istream &in);
std::vector<DatasetRow> read_dataset_file(const std::filesystem::path &path);

/// Benchmark-level split: roughly `fraction` of the distinct benchmarks go to
/// the first (training) half. Deterministic given `seed`.
std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> split_train(const std::vector<DatasetRow> &rows,
                                                                        double fraction, std::uint64_t seed);

std::vector<TrainingSample> to_samples(const std::vector<DatasetRow> &rows);

} // namespace metatune
