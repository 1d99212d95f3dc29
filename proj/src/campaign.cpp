#include "metatune/campaign.hpp"

#include "metatune/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace metatune {

namespace fs = std::filesystem;

std::vector<BenchmarkSpec> read_manifest(std::istream &in, const fs::path &base_dir) {
  std::vector<BenchmarkSpec> out;
  std::string line;
  std::size_t line_no = 0;
  auto resolve = [&](std::string_view p) {
    fs::path path{std::string(p)};
    return (path.is_relative() && !base_dir.empty()) ? base_dir / path : path;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto cols = detail::split(t, '\t');
    if (cols.size() != 3)
      throw FormatError("expected 'program<TAB>property<TAB>expected'", line_no);
    auto expected = parse_expected(detail::trim(cols[2]));
    if (!expected)
      throw FormatError("expected verdict must be true, false or unknown", line_no);
    const auto program = detail::trim(cols[0]);
    if (program.empty())
      throw FormatError("empty program path", line_no);
    out.push_back({resolve(program), resolve(detail::trim(cols[1])), *expected});
  }
  return out;
}

std::vector<BenchmarkSpec> read_manifest_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open manifest '" + path.string() + "'");
  return read_manifest(in, path.parent_path());
}

std::string benchmark_id(const BenchmarkSpec &bench) { return bench.program_path.lexically_normal().string(); }

ProgramFeatures features_of_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot read program '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return extract_features(parse_source(buf.str(), path.string()));
}

std::vector<double> feature_vector(const ProgramFeatures &features, const EncodedFlags &flags) {
  std::vector<double> x;
  x.reserve(kFeatureCount + kFlagFieldCount);
  for (auto v : features.values())
    x.push_back(static_cast<double>(v));
  x.insert(x.end(), flags.begin(), flags.end());
  return x;
}

// ---------------------------------------------------------------------------
// Journal

namespace {

struct JournalRecord {
  std::string bench;
  std::size_t cfg;
  VerdictKind verdict;
  double time_s;
  OutcomeClass cls;
};

std::string format_record(const JournalRecord &r) {
  return r.bench + '\t' + std::to_string(r.cfg) + '\t' + std::string(to_string(r.verdict)) + '\t' +
         detail::format_double(r.time_s) + '\t' + std::to_string(r.cls.value()) + '\n';
}

std::optional<JournalRecord> parse_record(std::string_view line) {
  const auto cols = detail::split(line, '\t');
  if (cols.size() != 5)
    return std::nullopt;
  auto cfg = detail::parse_int<std::size_t>(cols[1]);
  auto verdict = parse_verdict_tag(cols[2]);
  auto time = detail::parse_double(cols[3]);
  auto cls = detail::parse_int<int>(cols[4]);
  if (!cfg || !verdict || !time || !cls || *time < 0.0)
    return std::nullopt;
  if (classify(*verdict, *time).value() != *cls)
    return std::nullopt;
  return JournalRecord{std::string(cols[0]), *cfg, *verdict, *time, OutcomeClass(*cls)};
}

// Loads complete records and rewrites the file without any torn trailing line.
std::vector<JournalRecord> recover_journal(const fs::path &path) {
  std::vector<JournalRecord> records;
  if (!fs::exists(path))
    return records;
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  auto lines = detail::split(text, '\n');
  lines.pop_back(); // empty, or a partial record written when the run was killed
  for (auto line : lines)
    if (auto r = parse_record(line))
      records.push_back(std::move(*r));
  in.close();

  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto &r : records)
      out << format_record(r);
  }
  fs::rename(tmp, path);
  return records;
}

} // namespace

std::vector<DatasetRow> run_campaign(const CampaignManifest &manifest, const Backend &adapter,
                                     const CampaignOptions &options, std::stop_token stop) {
  if (!(manifest.timeout_s > 0.0))
    throw Error("campaign timeout must be positive");
  if (manifest.parallelism < 1)
    throw Error("campaign parallelism must be at least 1");

  const std::size_t n_bench = manifest.benchmarks.size();
  const std::size_t n_cfg = manifest.grid.size();
  const std::size_t total = n_bench * n_cfg;

  std::vector<std::string> ids;
  std::map<std::string, std::size_t> bench_index;
  for (std::size_t b = 0; b < n_bench; ++b) {
    ids.push_back(benchmark_id(manifest.benchmarks[b]));
    if (ids.back().find_first_of("\t\n") != std::string::npos)
      throw Error("benchmark path contains a tab or newline: " + ids.back());
    if (!bench_index.emplace(ids.back(), b).second)
      throw Error("benchmark listed twice: " + ids.back());
  }

  std::vector<ProgramFeatures> features;
  features.reserve(n_bench);
  for (const auto &bench : manifest.benchmarks)
    features.push_back(features_of_file(bench.program_path));

  std::vector<std::optional<JournalRecord>> cells(total);
  std::size_t done = 0;
  if (!options.journal.empty()) {
    for (auto &r : recover_journal(options.journal)) {
      auto it = bench_index.find(r.bench);
      if (it == bench_index.end() || r.cfg >= n_cfg)
        continue;
      auto &slot = cells[it->second * n_cfg + r.cfg];
      if (!slot)
        ++done;
      slot = std::move(r);
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < total; ++i)
    if (!cells[i])
      todo.push_back(i);

  std::ofstream journal;
  if (!options.journal.empty()) {
    journal.open(options.journal, std::ios::binary | std::ios::app);
    if (!journal)
      throw Error("cannot open journal '" + options.journal.string() + "'");
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;

  auto worker = [&] {
    while (!abort.load() && !stop.stop_requested()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size())
        return;
      const std::size_t cell = todo[k];
      const std::size_t b = cell / n_cfg;
      const std::size_t c = cell % n_cfg;
      try {
        const auto outcome = run_backend(manifest.benchmarks[b], manifest.grid[c], manifest.timeout_s, adapter);
        JournalRecord rec{ids[b], c, outcome.verdict, outcome.wall_time_s, classify_outcome(outcome)};
        std::lock_guard lock(mu);
        if (journal.is_open()) {
          journal << format_record(rec);
          journal.flush();
        }
        cells[cell] = std::move(rec);
        ++done;
        if (options.progress)
          options.progress(done, total);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure)
          failure = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  const std::size_t workers = std::min(manifest.parallelism, std::max<std::size_t>(todo.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i)
      pool.emplace_back(worker);
  }

  if (failure)
    std::rethrow_exception(failure);
  if (done < total)
    throw CampaignInterrupted("campaign stopped after " + std::to_string(done) + " of " + std::to_string(total) +
                              " cells");

  std::vector<DatasetRow> rows;
  rows.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto &rec = *cells[i];
    const std::size_t b = i / n_cfg;
    const std::size_t c = i % n_cfg;
    rows.push_back({ids[b], c, features[b], encode(manifest.grid[c]), rec.verdict, rec.time_s, rec.cls});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Dataset CSV

namespace {

std::string csv_quote(const std::string &s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + '"';
}

std::optional<std::vector<std::string>> csv_fields(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"' && out.back().empty()) {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted)
    return std::nullopt;
  return out;
}

std::string dataset_header() {
  std::string h = "bench,cfg";
  for (std::size_t i = 1; i <= kFeatureCount; ++i)
    h += ",f" + std::to_string(i);
  for (std::size_t i = 1; i <= kFlagFieldCount; ++i)
    h += ",g" + std::to_string(i);
  return h + ",verdict,time_s,class";
}

} // namespace

void write_dataset(std::ostream &out, const std::vector<DatasetRow> &rows) {
  out << dataset_header() << '\n';
  for (const auto &r : rows) {
    out << csv_quote(r.bench) << ',' << r.cfg;
    for (auto v : r.features.values())
      out << ',' << v;
    for (auto g : r.flags)
      out << ',' << static_cast<long long>(g);
    out << ',' << to_string(r.verdict) << ',' << detail::format_fixed(r.time_s, 3) << ',' << r.cls.value() << '\n';
  }
}

void write_dataset_file(const fs::path &path, const std::vector<DatasetRow> &rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot write dataset '" + path.string() + "'");
  write_dataset(out, rows);
}

std::vector<DatasetRow> read_dataset(std::istream &in) {
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("missing header", 1);
  if (detail::trim(line) != dataset_header())
    throw FormatError("unexpected header", 1);
  std::vector<DatasetRow> rows;
  std::size_t line_no = 1;
  constexpr std::size_t kColumns = 2 + kFeatureCount + kFlagFieldCount + 3;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto fields = csv_fields(line);
    if (!fields || fields->size() != kColumns)
      throw FormatError("expected " + std::to_string(kColumns) + " columns", line_no);
    const auto &f = *fields;
    DatasetRow row;
    row.bench = f[0];
    auto cfg = detail::parse_int<std::size_t>(f[1]);
    if (!cfg)
      throw FormatError("bad cfg '" + f[1] + "'", line_no);
    row.cfg = *cfg;
    std::array<std::uint64_t, kFeatureCount> fv{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      auto v = detail::parse_int<std::uint64_t>(f[2 + i]);
      if (!v)
        throw FormatError("bad feature f" + std::to_string(i + 1) + " '" + f[2 + i] + "'", line_no);
      fv[i] = *v;
    }
    row.features = ProgramFeatures::from_values(fv);
    for (std::size_t i = 0; i < kFlagFieldCount; ++i) {
      auto v = detail::parse_int<long long>(f[2 + kFeatureCount + i]);
      if (!v)
        throw FormatError("bad flag g" + std::to_string(i + 1), line_no);
      row.flags[i] = static_cast<double>(*v);
    }
    try {
      decode(row.flags);
    } catch (const FormatError &e) {
      throw FormatError(e.what(), line_no);
    }
    const std::size_t tail = 2 + kFeatureCount + kFlagFieldCount;
    auto verdict = parse_verdict_tag(f[tail]);
    if (!verdict)
      throw FormatError("unknown verdict '" + f[tail] + "'", line_no);
    row.verdict = *verdict;
    auto time = detail::parse_double(f[tail + 1]);
    if (!time || *time < 0.0)
      throw FormatError("bad time '" + f[tail + 1] + "'", line_no);
    row.time_s = *time;
    auto cls = detail::parse_int<int>(f[tail + 2]);
    if (!cls || *cls < 0 || *cls > 5)
      throw FormatError("bad class '" + f[tail + 2] + "'", line_no);
    row.cls = OutcomeClass(*cls);
    if (classify(row.verdict, row.time_s) != row.cls)
      throw FormatError("class " + std::to_string(*cls) + " contradicts verdict " + f[tail] + " at " + f[tail + 1] +
                            " s",
                        line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DatasetRow> read_dataset_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> split_train(const std::vector<DatasetRow> &rows,
                                                                        double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DegenerateSplit("fraction must lie strictly between 0 and 1");
  std::set<std::string> unique;
  for (const auto &r : rows)
    unique.insert(r.bench);
  std::vector<std::string> ids(unique.begin(), unique.end());

  // Fisher-Yates on the raw engine output keeps the split identical across
  // standard library implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[rng() % i]);

  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
  if (n_train == 0 || n_train >= ids.size())
    throw DegenerateSplit("split of " + std::to_string(ids.size()) + " benchmarks at fraction " +
                          std::to_string(fraction) + " leaves one side empty");
  const std::set<std::string> train_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));

  std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> out;
  for (const auto &r : rows)
    (train_ids.contains(r.bench) ? out.first : out.second).push_back(r);
  return out;
}

std::vector<TrainingSample> to_samples(const std::vector<DatasetRow> &rows) {
  std::vector<TrainingSample> samples;
  samples.reserve(rows.size());
  for (const auto &r : rows)
    samples.push_back({feature_vector(r.features, r.flags), r.cls, 1.0});
  return samples;
}

} // namespace metatune
