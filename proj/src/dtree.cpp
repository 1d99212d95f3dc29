#include "metatune/dtree.hpp"

#include "metatune/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace metatune {

namespace {

// Splits must lower impurity by more than this; candidates closer than this
// to the best are treated as ties.
constexpr double kImpurityEps = 1e-12;

void validate(std::span<const TrainingSample> samples) {
  if (samples.empty())
    throw EmptyTrainingSet();
  const auto dim = samples.front().x.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].x.size() != dim)
      throw DimensionMismatch("sample " + std::to_string(i) + " has " + std::to_string(samples[i].x.size()) +
                              " features, expected " + std::to_string(dim));
    if (!(samples[i].weight > 0.0))
      throw Error("sample " + std::to_string(i) + " has non-positive weight");
  }
}

std::array<double, kClassCount> balancing_factors(std::span<const TrainingSample> samples) {
  std::array<std::size_t, kClassCount> counts{};
  for (const auto &s : samples)
    ++counts[static_cast<std::size_t>(s.y.value())];
  const auto present = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
  const auto n = static_cast<double>(samples.size());
  std::array<double, kClassCount> factor{};
  for (std::size_t c = 0; c < kClassCount; ++c)
    factor[c] = counts[c] == 0 ? 0.0 : n / (present * static_cast<double>(counts[c]));
  return factor;
}

} // namespace

std::vector<TrainingSample> balance_weights(std::vector<TrainingSample> samples) {
  if (samples.empty())
    throw EmptyTrainingSet();
  const auto factor = balancing_factors(samples);
  for (auto &s : samples)
    s.weight = factor[static_cast<std::size_t>(s.y.value())];
  return samples;
}

double gini(const ClassWeights &w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0.0)
    return 0.0;
  double sum_sq = 0.0;
  for (double c : w) {
    const double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

OutcomeClass majority_class(const ClassWeights &w) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c)
    if (w[c] > w[best])
      best = c;
  return OutcomeClass(static_cast<int>(best));
}

// ---------------------------------------------------------------------------

DecisionTreeModel::DecisionTreeModel(std::vector<TreeNode> nodes, std::size_t root, std::size_t feature_count)
    : nodes_(std::move(nodes)), root_(root), feature_count_(feature_count) {
  if (nodes_.empty())
    throw FormatError("model has no nodes");
  if (root_ >= nodes_.size())
    throw FormatError("root id " + std::to_string(root_) + " out of range");
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::size_t> stack{root_};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    if (id >= nodes_.size())
      throw FormatError("child id " + std::to_string(id) + " out of range");
    if (seen[id])
      throw FormatError("node " + std::to_string(id) + " is reachable twice");
    seen[id] = true;
    ++visited;
    if (const auto *split = std::get_if<SplitNode>(&nodes_[id])) {
      if (split->feature_index >= feature_count_)
        throw FormatError("node " + std::to_string(id) + " splits on feature " +
                          std::to_string(split->feature_index) + " of " + std::to_string(feature_count_));
      stack.push_back(split->right);
      stack.push_back(split->left);
    }
  }
  if (visited != nodes_.size())
    throw FormatError(std::to_string(nodes_.size() - visited) + " node(s) unreachable from the root");
}

std::size_t DecisionTreeModel::leaf_for(std::span<const double> x) const {
  if (x.size() != feature_count_)
    throw DimensionMismatch("input has " + std::to_string(x.size()) + " features, model expects " +
                            std::to_string(feature_count_));
  std::size_t id = root_;
  while (const auto *split = std::get_if<SplitNode>(&nodes_[id]))
    id = x[split->feature_index] <= split->threshold ? split->left : split->right;
  return id;
}

OutcomeClass DecisionTreeModel::predict(std::span<const double> x) const {
  return std::get<LeafNode>(nodes_[leaf_for(x)]).predicted;
}

std::size_t DecisionTreeModel::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (const auto *split = std::get_if<SplitNode>(&nodes_[id])) {
      stack.emplace_back(split->left, d + 1);
      stack.emplace_back(split->right, d + 1);
    }
  }
  return best;
}

std::size_t DecisionTreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode &n) { return std::holds_alternative<LeafNode>(n); }));
}

OutcomeClass predict_class(const DecisionTreeModel &model, std::span<const double> x) { return model.predict(x); }

// ---------------------------------------------------------------------------
// Training

namespace {

class TreeBuilder {
public:
  TreeBuilder(std::span<const TrainingSample> samples, const TrainParams &params)
      : samples_(samples), params_(params), dim_(samples.front().x.size()) {
    if (params.min_samples_split < 2)
      throw Error("min_samples_split must be at least 2");
    if (params.min_samples_leaf < 1)
      throw Error("min_samples_leaf must be at least 1");
    weights_.resize(samples.size());
    const auto factor = balancing_factors(samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto c = static_cast<std::size_t>(samples[i].y.value());
      weights_[i] = params.class_weighting == ClassWeighting::Balanced ? samples[i].weight * factor[c]
                                                                       : samples[i].weight;
    }
  }

  // Canonical order: identical samples become interchangeable, so the
  // floating-point sums below do not depend on the caller's ordering.
  std::vector<std::size_t> canonical_indices() const {
    std::vector<std::size_t> idx(samples_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (samples_[a].x != samples_[b].x)
        return samples_[a].x < samples_[b].x;
      if (samples_[a].y != samples_[b].y)
        return samples_[a].y < samples_[b].y;
      return weights_[a] < weights_[b];
    });
    return idx;
  }

  ClassWeights totals(const std::vector<std::size_t> &idx) const {
    ClassWeights w{};
    for (auto i : idx)
      w[static_cast<std::size_t>(samples_[i].y.value())] += weights_[i];
    return w;
  }

  bool pure(const std::vector<std::size_t> &idx) const {
    return std::all_of(idx.begin(), idx.end(), [&](auto i) { return samples_[i].y == samples_[idx.front()].y; });
  }

  std::optional<SplitChoice> find_split(const std::vector<std::size_t> &idx, std::size_t depth) const {
    const std::size_t n = idx.size();
    if (n < params_.min_samples_split || (params_.max_depth && depth >= *params_.max_depth) || pure(idx))
      return std::nullopt;

    const ClassWeights total = totals(idx);
    const double total_w = std::accumulate(total.begin(), total.end(), 0.0);
    const double parent = gini(total);

    std::vector<SplitChoice> candidates;
    std::vector<std::size_t> sorted = idx;
    std::vector<ClassWeights> prefix(n), suffix(n);
    for (std::size_t f = 0; f < dim_; ++f) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) { return samples_[a].x[f] < samples_[b].x[f]; });
      ClassWeights acc{};
      for (std::size_t k = 0; k < n; ++k) {
        acc[static_cast<std::size_t>(samples_[sorted[k]].y.value())] += weights_[sorted[k]];
        prefix[k] = acc;
      }
      acc = {};
      for (std::size_t k = n; k-- > 0;) {
        acc[static_cast<std::size_t>(samples_[sorted[k]].y.value())] += weights_[sorted[k]];
        suffix[k] = acc;
      }
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double lo = samples_[sorted[k]].x[f];
        const double hi = samples_[sorted[k + 1]].x[f];
        if (lo == hi)
          continue;
        const std::size_t n_left = k + 1;
        if (n_left < params_.min_samples_leaf || n - n_left < params_.min_samples_leaf)
          continue;
        const auto &left = prefix[k];
        const auto &right = suffix[k + 1];
        const double wl = std::accumulate(left.begin(), left.end(), 0.0);
        const double wr = std::accumulate(right.begin(), right.end(), 0.0);
        const double impurity = (wl * gini(left) + wr * gini(right)) / total_w;
        double threshold = lo + (hi - lo) / 2.0;
        if (threshold >= hi)
          threshold = lo;
        candidates.push_back({f, threshold, impurity});
      }
    }
    if (candidates.empty())
      return std::nullopt;
    double best = candidates.front().impurity;
    for (const auto &c : candidates)
      best = std::min(best, c.impurity);
    if (!(best < parent - kImpurityEps))
      return std::nullopt;
    // Candidates were generated in (feature, threshold) order.
    for (const auto &c : candidates)
      if (c.impurity <= best + kImpurityEps)
        return c;
    return std::nullopt;
  }

  std::size_t build(const std::vector<std::size_t> &idx, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back(LeafNode{});
    auto split = find_split(idx, depth);
    if (!split) {
      const auto w = totals(idx);
      nodes_[id] = LeafNode{majority_class(w), w};
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto i : idx)
      (samples_[i].x[split->feature_index] <= split->threshold ? left : right).push_back(i);
    const auto l = build(left, depth + 1);
    const auto r = build(right, depth + 1);
    nodes_[id] = SplitNode{split->feature_index, split->threshold, l, r};
    return id;
  }

  DecisionTreeModel finish() { return DecisionTreeModel(std::move(nodes_), 0, dim_); }

private:
  std::span<const TrainingSample> samples_;
  const TrainParams &params_;
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<TreeNode> nodes_;
};

} // namespace

DecisionTreeModel train(std::span<const TrainingSample> samples, const TrainParams &params) {
  validate(samples);
  TreeBuilder builder(samples, params);
  builder.build(builder.canonical_indices(), 0);
  return builder.finish();
}

std::optional<SplitChoice> best_root_split(std::span<const TrainingSample> samples, const TrainParams &params) {
  validate(samples);
  TreeBuilder builder(samples, params);
  return builder.find_split(builder.canonical_indices(), 0);
}

// ---------------------------------------------------------------------------
// Text format

void save_model(const DecisionTreeModel &model, std::ostream &out) {
  out << "lfdt " << DecisionTreeModel::kFormatVersion << '\n';
  out << "features " << model.feature_count() << '\n';
  out << "nodes " << model.nodes().size() << '\n';
  for (std::size_t id = 0; id < model.nodes().size(); ++id) {
    out << "node " << id;
    if (const auto *leaf = std::get_if<LeafNode>(&model.nodes()[id])) {
      out << " leaf " << leaf->predicted.value();
      for (double w : leaf->class_weights)
        out << ' ' << detail::format_double(w);
    } else {
      const auto &split = std::get<SplitNode>(model.nodes()[id]);
      out << " split " << split.feature_index << ' ' << detail::format_double(split.threshold) << ' ' << split.left
          << ' ' << split.right;
    }
    out << '\n';
  }
  out << "root " << model.root() << '\n';
}

std::string save_model(const DecisionTreeModel &model) {
  std::ostringstream out;
  save_model(model, out);
  return out.str();
}

namespace {

template <typename Int> Int expect_int(std::string_view s, std::size_t line, std::string_view what) {
  auto v = detail::parse_int<Int>(s);
  if (!v)
    throw FormatError("bad " + std::string(what) + " '" + std::string(s) + "'", line);
  return *v;
}

double expect_double(std::string_view s, std::size_t line, std::string_view what) {
  auto v = detail::parse_double(s);
  if (!v)
    throw FormatError("bad " + std::string(what) + " '" + std::string(s) + "'", line);
  return *v;
}

} // namespace

DecisionTreeModel load_model(std::string_view text) {
  std::vector<std::string_view> lines = detail::split(text, '\n');
  if (!lines.empty() && lines.back().empty())
    lines.pop_back();
  auto fields = [&](std::size_t i) { return detail::split_ws(lines[i]); };
  auto header = [&](std::size_t i, std::string_view key) -> std::string_view {
    if (i >= lines.size())
      throw FormatError("missing '" + std::string(key) + "' line", i + 1);
    const auto f = fields(i);
    if (f.size() != 2 || f[0] != key)
      throw FormatError("expected '" + std::string(key) + " <value>'", i + 1);
    return f[1];
  };

  const auto version = expect_int<int>(header(0, "lfdt"), 1, "format version");
  if (version != DecisionTreeModel::kFormatVersion)
    throw VersionError("unsupported model format version " + std::to_string(version));
  const auto features = expect_int<std::size_t>(header(1, "features"), 2, "feature count");
  const auto count = expect_int<std::size_t>(header(2, "nodes"), 3, "node count");

  std::vector<std::optional<TreeNode>> slots(count);
  std::size_t line = 3;
  for (; line < lines.size(); ++line) {
    const auto f = fields(line);
    if (f.empty() || f[0] != "node")
      break;
    const auto ln = line + 1;
    if (f.size() < 3)
      throw FormatError("truncated node line", ln);
    const auto id = expect_int<std::size_t>(f[1], ln, "node id");
    if (id >= count)
      throw FormatError("node id " + std::to_string(id) + " exceeds declared count " + std::to_string(count), ln);
    if (slots[id])
      throw FormatError("duplicate node id " + std::to_string(id), ln);
    if (f[2] == "leaf") {
      if (f.size() != 3 + 1 + kClassCount)
        throw FormatError("leaf needs a class and 6 weights", ln);
      LeafNode leaf;
      const auto cls = expect_int<int>(f[3], ln, "class");
      if (cls < OutcomeClass::kMin || cls > OutcomeClass::kMax)
        throw FormatError("class " + std::to_string(cls) + " outside 0..5", ln);
      leaf.predicted = OutcomeClass(cls);
      for (std::size_t c = 0; c < kClassCount; ++c) {
        leaf.class_weights[c] = expect_double(f[4 + c], ln, "class weight");
        if (leaf.class_weights[c] < 0.0)
          throw FormatError("negative class weight", ln);
      }
      slots[id] = leaf;
    } else if (f[2] == "split") {
      if (f.size() != 7)
        throw FormatError("split needs feature, threshold, left and right", ln);
      slots[id] = SplitNode{expect_int<std::size_t>(f[3], ln, "feature index"),
                            expect_double(f[4], ln, "threshold"), expect_int<std::size_t>(f[5], ln, "left id"),
                            expect_int<std::size_t>(f[6], ln, "right id")};
    } else {
      throw FormatError("node kind must be leaf or split", ln);
    }
  }
  const std::size_t defined = line - 3;
  if (defined != count)
    throw FormatError("declared " + std::to_string(count) + " nodes but found " + std::to_string(defined), line + 1);
  const auto root = expect_int<std::size_t>(header(line, "root"), line + 1, "root id");
  if (line + 1 != lines.size())
    throw FormatError("unexpected content after root line", line + 2);

  std::vector<TreeNode> nodes;
  nodes.reserve(count);
  for (auto &s : slots)
    nodes.push_back(std::move(*s));
  try {
    return DecisionTreeModel(std::move(nodes), root, features);
  } catch (const FormatError &e) {
    throw FormatError(std::string("invalid tree: ") + e.what());
  }
}

DecisionTreeModel load_model_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

} // namespace metatune
