#pragma once

#include "metatune/backend.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace metatune {

inline constexpr std::size_t kClassCount = 6;
using ClassWeights = std::array<double, kClassCount>;

struct TrainingSample {
  std::vector<double> x;
  OutcomeClass y;
  double weight = 1.0;
};

enum class ClassWeighting { Balanced, Uniform };

struct TrainParams {
  std::size_t min_samples_split = 4;
  std::size_t min_samples_leaf = 3;
  std::optional<std::size_t> max_depth; // unlimited when empty
  ClassWeighting class_weighting = ClassWeighting::Balanced;
};

/// Weight every sample by N / (C * n_c): N samples, C classes present, n_c
/// samples of the sample's class. Throws EmptyTrainingSet.
std::vector<TrainingSample> balance_weights(std::vector<TrainingSample> samples);

/// 1 - sum_c (w_c / W)^2; zero for an empty node.
double gini(const ClassWeights &w);

/// Most heavily weighted class, lowest class on ties.
OutcomeClass majority_class(const ClassWeights &w);

struct LeafNode {
  OutcomeClass predicted;
  ClassWeights class_weights{};
};

struct SplitNode {
  std::size_t feature_index = 0;
  double threshold = 0.0; // x[feature] <= threshold goes left
  std::size_t left = 0;
  std::size_t right = 0;
};

using TreeNode = std::variant<LeafNode, SplitNode>;

class DecisionTreeModel {
public:
  static constexpr int kFormatVersion = 1;

  DecisionTreeModel() = default;
  /// Validates that `nodes` form a single rooted binary tree.
  DecisionTreeModel(std::vector<TreeNode> nodes, std::size_t root, std::size_t feature_count);

  /// Throws DimensionMismatch when `x` has the wrong length.
  OutcomeClass predict(std::span<const double> x) const;
  /// Id of the leaf `x` lands in.
  std::size_t leaf_for(std::span<const double> x) const;

  const std::vector<TreeNode> &nodes() const { return nodes_; }
  std::size_t root() const { return root_; }
  std::size_t feature_count() const { return feature_count_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

private:
  std::vector<TreeNode> nodes_;
  std::size_t root_ = 0;
  std::size_t feature_count_ = 0;
};

/// Greedy CART with Gini impurity. Thresholds are midpoints between
/// consecutive distinct feature values; ties go to the lowest feature index,
/// then the lowest threshold. The result does not depend on sample order.
DecisionTreeModel train(std::span<const TrainingSample> samples, const TrainParams &params = {});

/// Best root split as chosen by `train`; empty when the root would be a leaf.
struct SplitChoice {
  std::size_t feature_index;
  double threshold;
  double impurity; // weighted child Gini
};
std::optional<SplitChoice> best_root_split(std::span<const TrainingSample> samples, const TrainParams &params = {});

OutcomeClass predict_class(const DecisionTreeModel &model, std::span<const double> x);

std::string save_model(const DecisionTreeModel &model);
void save_model(const DecisionTreeModel &model, std::ostream &out);
/// Throws FormatError (with line number) or VersionError.
DecisionTreeModel load_model(std::string_view text);
DecisionTreeModel load_model_file(const std::string &path);

} // namespace metatune
