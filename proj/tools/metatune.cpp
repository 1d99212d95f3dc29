// metatune: predicts verifier flags for a concurrent C program and runs the
// verifier with them. Subcommands cover each stage of the pipeline so it can
// be driven (and tested) piecewise.

#include "metatune/metatune.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

using namespace metatune;

constexpr int kExitDefinitive = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUnknown = 10;
constexpr int kExitTimeout = 20;
constexpr int kExitError = 30;
constexpr int kExitUsage = 64;

FlagGrid load_grid(const std::string &spec) {
  if (spec.empty() || spec == "builtin")
    return canonical_grid();
  return read_grid_file(spec);
}

struct BackendChoice {
  std::string adapter_path; // --backend
  std::string mock_table;   // --mock-table
  bool mock_sleep = false;
  std::string arch = "32";
};

std::unique_ptr<Backend> make_backend(const BackendChoice &choice, const FlagGrid &grid) {
  if (!choice.mock_table.empty())
    return std::make_unique<MockBackend>(MockTable::read_file(choice.mock_table), grid, choice.mock_sleep);
  std::string path = choice.adapter_path;
  if (path.empty())
    if (const char *env = std::getenv("METATUNE_BACKEND"); env && *env)
      path = env;
  AdapterConfig cfg = path.empty() ? AdapterConfig{} : read_adapter_config_file(path);
  cfg.arch = choice.arch;
  return std::make_unique<ProcessBackend>(std::move(cfg));
}

std::string join(const std::vector<std::string> &args) {
  std::string out;
  for (const auto &a : args) {
    if (!out.empty())
      out += ' ';
    out += a;
  }
  return out;
}

int exit_code_for(RawVerdict v) {
  switch (v) {
  case RawVerdict::True:
  case RawVerdict::False:
    return kExitDefinitive;
  case RawVerdict::Unknown:
    return kExitUnknown;
  case RawVerdict::Timeout:
    return kExitTimeout;
  case RawVerdict::Error:
    return kExitError;
  }
  return kExitError;
}

// --- extract ---------------------------------------------------------------

int cmd_extract(const std::vector<std::string> &files) {
  for (const auto &file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
      throw Error("cannot read program '" + file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto unit = parse_source(buf.str(), file);
    for (const auto &w : unit.warnings)
      std::cerr << file << ": warning: " << w << '\n';
    std::cout << features_to_json(extract_features(unit), file) << '\n';
  }
  return kExitDefinitive;
}

// --- grid ------------------------------------------------------------------

int cmd_grid(const std::string &grid_spec, const std::string &out_path) {
  const auto grid = load_grid(grid_spec);
  if (out_path.empty() || out_path == "-") {
    write_grid(std::cout, grid);
  } else {
    std::ofstream out(out_path);
    if (!out)
      throw Error("cannot write '" + out_path + "'");
    write_grid(out, grid);
  }
  return kExitDefinitive;
}

// --- label -----------------------------------------------------------------

struct LabelOptions {
  std::string manifest;
  std::string out;
  std::string journal;
  std::string grid = "builtin";
  double timeout_s = 180.0;
  std::size_t jobs = 1;
  std::string select = "all";
  std::string model;
  bool quiet = false;
  BackendChoice backend;
};

int cmd_label(const LabelOptions &o) {
  CampaignManifest manifest;
  manifest.benchmarks = read_manifest_file(o.manifest);
  manifest.grid = load_grid(o.grid);
  manifest.timeout_s = o.timeout_s;
  manifest.parallelism = o.jobs;
  const auto backend = make_backend(o.backend, manifest.grid);

  std::vector<DatasetRow> rows;
  if (o.select == "all") {
    CampaignOptions opts;
    opts.journal = o.journal;
    if (!o.quiet)
      opts.progress = [](std::size_t done, std::size_t total) {
        if (done == total || done % 100 == 0)
          std::cerr << "\rlabelled " << done << '/' << total << std::flush;
      };
    rows = run_campaign(manifest, *backend, opts);
    if (!o.quiet)
      std::cerr << '\n';
  } else {
    // One run per benchmark with a single configuration.
    std::optional<DecisionTreeModel> model;
    if (o.select == "predicted") {
      if (o.model.empty())
        throw Error("--select predicted requires --model");
      model = load_model_file(o.model);
    }
    for (const auto &bench : manifest.benchmarks) {
      FlagConfiguration config = default_config();
      std::size_t index = manifest.grid.index_of(config).value_or(0);
      if (model) {
        const auto p = select_flags(*model, features_of_file(bench.program_path), manifest.grid);
        config = p.chosen;
        index = p.chosen_index;
      }
      CampaignManifest single = manifest;
      single.benchmarks = {bench};
      single.grid = FlagGrid({config});
      single.parallelism = 1;
      auto cell = run_campaign(single, *backend);
      cell.front().cfg = index;
      rows.push_back(std::move(cell.front()));
    }
  }
  write_dataset_file(o.out, rows);
  return kExitDefinitive;
}

// --- train -----------------------------------------------------------------

struct TrainOptions {
  std::string dataset;
  std::string out;
  std::size_t min_split = 4;
  std::size_t min_leaf = 3;
  std::size_t max_depth = 0;
  std::string weighting = "balanced";
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainOptions &o) {
  auto rows = read_dataset_file(o.dataset);
  if (o.train_fraction > 0.0) {
    auto [train_rows, holdout] = split_train(rows, o.train_fraction, o.seed);
    std::cerr << "training on " << train_rows.size() << " rows, holding out " << holdout.size() << '\n';
    rows = std::move(train_rows);
  }
  TrainParams params;
  params.min_samples_split = o.min_split;
  params.min_samples_leaf = o.min_leaf;
  if (o.max_depth > 0)
    params.max_depth = o.max_depth;
  params.class_weighting = o.weighting == "uniform" ? ClassWeighting::Uniform : ClassWeighting::Balanced;
  const auto samples = to_samples(rows);
  const auto model = train(samples, params);
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot write model '" + o.out + "'");
  save_model(model, out);
  std::cerr << "trained on " << samples.size() << " samples: " << model.nodes().size() << " nodes, depth "
            << model.depth() << '\n';
  return kExitDefinitive;
}

// --- predict / verify ------------------------------------------------------

int cmd_predict(const std::string &model_path, const std::string &grid_spec, const std::string &program,
                bool show_all) {
  const auto model = load_model_file(model_path);
  const auto grid = load_grid(grid_spec);
  const auto p = select_flags(model, features_of_file(program), grid);
  std::cout << "config-index: " << p.chosen_index << '\n';
  std::cout << "predicted-class: " << p.predicted_class.value() << '\n';
  std::cout << "flags: " << join(render_flags(p.chosen)) << '\n';
  if (show_all)
    for (auto [i, cls] : p.per_config_classes)
      std::cout << i << ' ' << cls.value() << ' ' << format_config_line(grid[i]) << '\n';
  return kExitDefinitive;
}

struct VerifyOptions {
  std::string property;
  std::string model;
  std::string grid = "builtin";
  double timeout_s = 180.0;
  std::string expected = "unknown";
  bool fallback_default = false;
  std::string program;
  BackendChoice backend;
};

int cmd_verify(const VerifyOptions &o) {
  const auto grid = load_grid(o.grid);
  FlagConfiguration config = default_config();
  std::string index = "default";
  std::string cls = "-";
  if (!o.fallback_default) {
    if (o.model.empty())
      throw Error("--model is required unless --fallback-default is given");
    const auto model = load_model_file(o.model);
    const auto p = select_flags(model, features_of_file(o.program), grid);
    config = p.chosen;
    index = std::to_string(p.chosen_index);
    cls = std::to_string(p.predicted_class.value());
  }
  BenchmarkSpec bench{o.program, o.property, parse_expected(o.expected).value_or(Expected::Unspecified)};
  const auto backend = make_backend(o.backend, grid);
  const auto outcome = run_backend(bench, config, o.timeout_s, *backend);

  std::cout << "config-index: " << index << '\n';
  std::cout << "predicted-class: " << cls << '\n';
  std::cout << "flags: " << join(render_flags(config)) << '\n';
  std::cout << "verdict: " << to_string(outcome.raw) << '\n';
  if (bench.expected != Expected::Unspecified)
    std::cout << "judged: " << to_string(outcome.verdict) << " (class " << classify_outcome(outcome).value() << ")\n";
  char time[32];
  std::snprintf(time, sizeof time, "%.3f", outcome.wall_time_s);
  std::cout << "time: " << time << '\n';
  return exit_code_for(outcome.raw);
}

// --- report ----------------------------------------------------------------

int cmd_report(const std::string &baseline, const std::string &predicted, const std::string &csv_path) {
  const auto report = report_compare(read_dataset_file(baseline), read_dataset_file(predicted));
  print_report(std::cout, report);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out)
      throw Error("cannot write '" + csv_path + "'");
    write_report_csv(out, report);
  }
  return kExitDefinitive;
}

void add_backend_options(CLI::App *cmd, BackendChoice &b) {
  cmd->add_option("--backend", b.adapter_path, "Adapter config file (default: $METATUNE_BACKEND, else esbmc)");
  cmd->add_option("--mock-table", b.mock_table, "Use the in-process mock backend with this outcome table");
  cmd->add_flag("--mock-sleep", b.mock_sleep, "Make the mock backend really sleep for its delays");
  cmd->add_option("--arch", b.arch, "Target architecture passed to the verifier")->check(CLI::IsMember({"32", "64"}));
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"metatune - learned flag selection for a bounded model checker"};
  app.require_subcommand(1);

  std::vector<std::string> extract_files;
  auto *extract = app.add_subcommand("extract", "Print program features, one JSON record per file");
  extract->add_option("files", extract_files, "C source files")->required()->check(CLI::ExistingFile);

  std::string grid_spec = "builtin", grid_out;
  auto *grid = app.add_subcommand("grid", "Print the flag grid in grid-file format");
  grid->add_option("--grid", grid_spec, "Grid file to normalise instead of the built-in grid");
  grid->add_option("-o,--out", grid_out, "Output file (default stdout)");

  LabelOptions label_opts;
  auto *label = app.add_subcommand("label", "Run every benchmark x configuration and write a dataset");
  label->add_option("--manifest", label_opts.manifest, "Benchmark manifest")->required()->check(CLI::ExistingFile);
  label->add_option("-o,--out", label_opts.out, "Dataset CSV to write")->required();
  label->add_option("--journal", label_opts.journal, "Checkpoint journal (resumes if present)");
  label->add_option("--grid", label_opts.grid, "Grid file or 'builtin'");
  label->add_option("--timeout", label_opts.timeout_s, "Per-run timeout in seconds")->check(CLI::PositiveNumber);
  label->add_option("-j,--jobs", label_opts.jobs, "Parallel backend runs")->check(CLI::PositiveNumber);
  label->add_option("--select", label_opts.select, "Which configurations to run")
      ->check(CLI::IsMember({"all", "default", "predicted"}));
  label->add_option("--model", label_opts.model, "Model for --select predicted");
  label->add_flag("-q,--quiet", label_opts.quiet, "No progress output");
  add_backend_options(label, label_opts.backend);

  TrainOptions train_opts;
  auto *train_cmd = app.add_subcommand("train", "Train a decision tree on a labelled dataset");
  train_cmd->add_option("--dataset", train_opts.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--out", train_opts.out, "Model file to write")->required();
  train_cmd->add_option("--min-split", train_opts.min_split, "Minimum samples to split a node");
  train_cmd->add_option("--min-leaf", train_opts.min_leaf, "Minimum samples per leaf");
  train_cmd->add_option("--max-depth", train_opts.max_depth, "Depth limit (0 = unlimited)");
  train_cmd->add_option("--weighting", train_opts.weighting, "Sample weighting")
      ->check(CLI::IsMember({"balanced", "uniform"}));
  train_cmd->add_option("--train-fraction", train_opts.train_fraction,
                        "Train on this fraction of benchmarks (0 = all)");
  train_cmd->add_option("--seed", train_opts.seed, "Seed for --train-fraction");

  std::string predict_model, predict_grid = "builtin", predict_program;
  bool predict_all = false;
  auto *predict = app.add_subcommand("predict", "Print the predicted flags without verifying");
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("--grid", predict_grid, "Grid file or 'builtin'");
  predict->add_flag("--all", predict_all, "Also list the predicted class of every grid entry");
  predict->add_option("program", predict_program, "C source file")->required()->check(CLI::ExistingFile);

  VerifyOptions verify_opts;
  auto *verify = app.add_subcommand("verify", "Predict flags and run the verifier once");
  verify->add_option("-p,--property", verify_opts.property, "Property file passed to the verifier")->required();
  verify->add_option("--model", verify_opts.model, "Model file");
  verify->add_option("--grid", verify_opts.grid, "Grid file or 'builtin'");
  verify->add_option("--timeout", verify_opts.timeout_s, "Timeout in seconds")->check(CLI::PositiveNumber);
  verify->add_option("--expected", verify_opts.expected, "Known verdict, to judge the answer")
      ->check(CLI::IsMember({"true", "false", "unknown"}));
  verify->add_flag("--fallback-default", verify_opts.fallback_default, "Skip prediction, use the default flags");
  verify->add_option("benchmark", verify_opts.program, "C source file")->required()->check(CLI::ExistingFile);
  add_backend_options(verify, verify_opts.backend);

  std::string report_baseline, report_predicted, report_csv;
  auto *report = app.add_subcommand("report", "Compare default and predicted verification results");
  report->add_option("--default", report_baseline, "Dataset from the default configuration")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--predicted", report_predicted, "Dataset from predicted configurations")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--csv", report_csv, "Also write bucket counts as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*extract)
      return cmd_extract(extract_files);
    if (*grid)
      return cmd_grid(grid_spec, grid_out);
    if (*label)
      return cmd_label(label_opts);
    if (*train_cmd)
      return cmd_train(train_opts);
    if (*predict)
      return cmd_predict(predict_model, predict_grid, predict_program, predict_all);
    if (*verify)
      return cmd_verify(verify_opts);
    if (*report)
      return cmd_report(report_baseline, report_predicted, report_csv);
  } catch (const std::exception &e) {
    std::cerr << "metatune: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
