#include "metatune/report.hpp"

#include "metatune/error.hpp"

#include <cstdio>
#include <ostream>

namespace metatune {

std::optional<double> improvement_percent(std::size_t baseline_correct, std::size_t predicted_correct) {
  if (baseline_correct == 0)
    return std::nullopt;
  return 100.0 * (static_cast<double>(predicted_correct) - static_cast<double>(baseline_correct)) /
         static_cast<double>(baseline_correct);
}

std::optional<double> ComparisonReport::improvement_percent() const {
  return metatune::improvement_percent(baseline.all_correct(), predicted.all_correct());
}

namespace {

void tally(BucketCounts &counts, VerdictKind v, std::optional<bool> witness_confirmed) {
  switch (v) {
  case VerdictKind::CorrectTrue:
  case VerdictKind::CorrectFalse:
    if (witness_confirmed == false)
      ++counts.correct_unconfirmed;
    else
      ++counts.correct;
    break;
  case VerdictKind::Incorrect:
    ++counts.incorrect;
    break;
  case VerdictKind::Timeout:
    ++counts.timeout;
    break;
  case VerdictKind::Unknown:
  case VerdictKind::Error:
    ++counts.unknown;
    break;
  }
}

std::map<std::string, const DatasetRow *> index_rows(const std::vector<DatasetRow> &rows, std::string_view which) {
  std::map<std::string, const DatasetRow *> out;
  for (const auto &r : rows)
    if (!out.emplace(r.bench, &r).second)
      throw BenchmarkMismatch(std::string(which) + " dataset has more than one row for " + r.bench);
  return out;
}

std::optional<bool> lookup(const WitnessStatus &w, const std::string &bench) {
  auto it = w.find(bench);
  if (it == w.end())
    return std::nullopt;
  return it->second;
}

} // namespace

ComparisonReport report_compare(const std::vector<DatasetRow> &baseline, const std::vector<DatasetRow> &predicted,
                                const WitnessStatus &baseline_witness, const WitnessStatus &predicted_witness) {
  const auto base = index_rows(baseline, "baseline");
  const auto pred = index_rows(predicted, "predicted");
  for (const auto &[bench, row] : base)
    if (!pred.contains(bench))
      throw BenchmarkMismatch("benchmark " + bench + " missing from predicted dataset");
  for (const auto &[bench, row] : pred)
    if (!base.contains(bench))
      throw BenchmarkMismatch("benchmark " + bench + " missing from baseline dataset");

  ComparisonReport report;
  for (const auto &[bench, row] : base) {
    const auto &other = *pred.at(bench);
    tally(report.baseline, row->verdict, lookup(baseline_witness, bench));
    tally(report.predicted, other.verdict, lookup(predicted_witness, bench));
    report.per_benchmark.push_back({bench, row->verdict, other.verdict});
  }
  return report;
}

void print_report(std::ostream &out, const ComparisonReport &report, std::string_view baseline_name,
                  std::string_view predicted_name) {
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %12s %12s\n", "category", std::string(baseline_name).c_str(),
                std::string(predicted_name).c_str());
  out << line;
  auto row = [&](const char *name, std::size_t a, std::size_t b) {
    std::snprintf(line, sizeof line, "%-22s %12zu %12zu\n", name, a, b);
    out << line;
  };
  row("correct", report.baseline.correct, report.predicted.correct);
  row("correct-unconfirmed", report.baseline.correct_unconfirmed, report.predicted.correct_unconfirmed);
  row("incorrect", report.baseline.incorrect, report.predicted.incorrect);
  row("unknown", report.baseline.unknown, report.predicted.unknown);
  row("timeout", report.baseline.timeout, report.predicted.timeout);
  row("total", report.baseline.total(), report.predicted.total());
  if (auto imp = report.improvement_percent()) {
    std::snprintf(line, sizeof line, "improvement in correct results: %+.1f%%\n", *imp);
    out << line;
  } else {
    out << "improvement in correct results: n/a (baseline has no correct results)\n";
  }
}

void write_report_csv(std::ostream &out, const ComparisonReport &report, std::string_view baseline_name,
                      std::string_view predicted_name) {
  out << "tool,correct,correct_unconfirmed,incorrect,unknown,timeout\n";
  auto row = [&](std::string_view name, const BucketCounts &c) {
    out << name << ',' << c.correct << ',' << c.correct_unconfirmed << ',' << c.incorrect << ',' << c.unknown << ','
        << c.timeout << '\n';
  };
  row(baseline_name, report.baseline);
  row(predicted_name, report.predicted);
}

} // namespace metatune
