#pragma once

#include "metatune/dtree.hpp"
#include "metatune/features.hpp"
#include "metatune/flags.hpp"

#include <utility>
#include <vector>

namespace metatune {

struct Prediction {
  FlagConfiguration chosen;
  std::size_t chosen_index = 0;
  OutcomeClass predicted_class;
  std::vector<std::pair<std::size_t, OutcomeClass>> per_config_classes;
};

/// Scores every grid entry and returns the first one with the lowest
/// predicted class. Throws DimensionMismatch for a model not trained on
/// 19-wide inputs, and Error for an empty grid.
Prediction select_flags(const DecisionTreeModel &model, const ProgramFeatures &features, const FlagGrid &grid);

} // namespace metatune
