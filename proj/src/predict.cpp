#include "metatune/predict.hpp"

#include "metatune/campaign.hpp"
#include "metatune/error.hpp"

namespace metatune {

Prediction select_flags(const DecisionTreeModel &model, const ProgramFeatures &features, const FlagGrid &grid) {
  constexpr std::size_t kInputWidth = kFeatureCount + kFlagFieldCount;
  if (model.feature_count() != kInputWidth)
    throw DimensionMismatch("model expects " + std::to_string(model.feature_count()) + " inputs, predictor supplies " +
                            std::to_string(kInputWidth));
  if (grid.empty())
    throw Error("flag grid is empty");

  Prediction p;
  p.per_config_classes.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto cls = model.predict(feature_vector(features, encode(grid[i])));
    p.per_config_classes.emplace_back(i, cls);
    if (i == 0 || cls < p.predicted_class) {
      p.predicted_class = cls;
      p.chosen_index = i;
    }
  }
  p.chosen = grid[p.chosen_index];
  return p;
}

} // namespace metatune
