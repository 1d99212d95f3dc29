#pragma once

// Shared helpers for the unit and acceptance suites.

#include "metatune/metatune.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

namespace metatune::testing {

inline std::filesystem::path fixture_dir() { return METATUNE_FIXTURE_DIR; }

inline std::string read_text(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text(const std::filesystem::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("metatune-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

/// Random dataset with integer-valued features in [0, levels).
inline std::vector<TrainingSample> random_dataset(std::mt19937_64 &rng, std::size_t n, std::size_t dim,
                                                  int levels = 4, int classes = 6) {
  std::uniform_int_distribution<int> feat(0, levels - 1);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::vector<TrainingSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingSample s;
    for (std::size_t d = 0; d < dim; ++d)
      s.x.push_back(feat(rng));
    s.y = OutcomeClass(cls(rng));
    out.push_back(std::move(s));
  }
  return out;
}

/// Rows produced by routing `samples` through `model`: count per node.
inline std::vector<std::size_t> node_sample_counts(const DecisionTreeModel &model,
                                                   const std::vector<TrainingSample> &samples) {
  std::vector<std::size_t> counts(model.nodes().size(), 0);
  for (const auto &s : samples) {
    std::size_t id = model.root();
    while (true) {
      ++counts[id];
      const auto *split = std::get_if<SplitNode>(&model.nodes()[id]);
      if (!split)
        break;
      id = s.x[split->feature_index] <= split->threshold ? split->left : split->right;
    }
  }
  return counts;
}

} // namespace metatune::testing
