// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twingrid/errors.hpp"
#include "twingrid/parallel.hpp"
#include "twingrid/rng.hpp"

namespace twingrid::ml {

namespace {

struct BuildNode {
  int node_index;
  Eigen::Index begin;
  Eigen::Index end;  // span over the per-feature sorted arrays
  int depth;
  std::int64_t weight;
  std::int64_t weight1;
};

struct TreeBuilder {
  const Matrixd& x;
  const Eigen::VectorXi& y;
  const Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>& presorted;
  const RfHyper& hyper;
  int mtry;
  Rng rng;

  std::vector<std::int32_t> weight;        // bootstrap multiplicity per sample
  std::vector<std::vector<std::int32_t>> order;  // per feature, samples sorted by value
  std::vector<std::int32_t> scratch;
  std::vector<char> goes_left;
  std::vector<int> feature_pool;
  DecisionTree tree;
  std::vector<double> importance;  // raw impurity-decrease sums per feature

  TreeBuilder(const Matrixd& x_in, const Eigen::VectorXi& y_in,
              const Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>& presorted_in,
              const RfHyper& hyper_in, int mtry_in, Rng rng_in)
      : x(x_in),
        y(y_in),
        presorted(presorted_in),
        hyper(hyper_in),
        mtry(mtry_in),
        rng(rng_in),
        importance(static_cast<std::size_t>(x_in.cols()), 0.0) {}

  void build() {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());

    weight.assign(n, 0);
    for (std::size_t draw = 0; draw < n; ++draw) {
      ++weight[rng.uniform_int(static_cast<std::uint64_t>(n))];
    }

    order.resize(d);
    Eigen::Index m = 0;
    for (std::size_t j = 0; j < d; ++j) {
      auto& col = order[j];
      col.clear();
      for (Eigen::Index pos = 0; pos < x.rows(); ++pos) {
        const std::int32_t i = presorted(pos, static_cast<Eigen::Index>(j));
        if (weight[static_cast<std::size_t>(i)] > 0) col.push_back(i);
      }
      m = static_cast<Eigen::Index>(col.size());
    }
    scratch.resize(static_cast<std::size_t>(m));
    goes_left.assign(n, 0);
    feature_pool.resize(d);

    std::int64_t w_root = 0;
    std::int64_t w1_root = 0;
    for (std::size_t i = 0; i < n; ++i) {
      w_root += weight[i];
      w1_root += static_cast<std::int64_t>(weight[i]) * y[static_cast<Eigen::Index>(i)];
    }

    tree.nodes.clear();
    tree.nodes.push_back({});
    std::vector<BuildNode> stack;
    stack.push_back({0, 0, m, 0, w_root, w1_root});
    while (!stack.empty()) {
      const BuildNode node = stack.back();
      stack.pop_back();
      split_node(node, stack, static_cast<double>(w_root));
    }
  }

  static double children_score(std::int64_t wl, std::int64_t wl1, std::int64_t wr,
                               std::int64_t wr1) {
    const std::int64_t wl0 = wl - wl1;
    const std::int64_t wr0 = wr - wr1;
    return (static_cast<double>(wl0) * static_cast<double>(wl0) +
            static_cast<double>(wl1) * static_cast<double>(wl1)) /
               static_cast<double>(wl) +
           (static_cast<double>(wr0) * static_cast<double>(wr0) +
            static_cast<double>(wr1) * static_cast<double>(wr1)) /
               static_cast<double>(wr);
  }

  static double gini(std::int64_t w, std::int64_t w1) {
    const double p1 = static_cast<double>(w1) / static_cast<double>(w);
    const double p0 = 1.0 - p1;
    return 1.0 - p0 * p0 - p1 * p1;
  }

  void make_leaf(const BuildNode& node) {
    tree.nodes[static_cast<std::size_t>(node.node_index)].feature = -1;
    tree.nodes[static_cast<std::size_t>(node.node_index)].p1 =
        static_cast<double>(node.weight1) / static_cast<double>(node.weight);
  }

  void split_node(const BuildNode& node, std::vector<BuildNode>& stack, double w_total) {
    const double node_gini = gini(node.weight, node.weight1);
    if (node.depth >= hyper.max_depth || node.weight < hyper.min_samples_split ||
        node_gini == 0.0) {
      make_leaf(node);
      return;
    }

    // Draw mtry distinct candidate features, then visit them in ascending
    // order so equal-quality splits resolve to the lowest feature index.
    const int d = static_cast<int>(x.cols());
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      const auto pick =
          i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d - i)));
      std::swap(feature_pool[static_cast<std::size_t>(i)],
                feature_pool[static_cast<std::size_t>(pick)]);
    }
    std::sort(feature_pool.begin(), feature_pool.begin() + mtry);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -1.0;
    std::int64_t best_wl = 0;
    std::int64_t best_wl1 = 0;
    const std::int64_t min_leaf = hyper.min_samples_leaf;

    for (int c = 0; c < mtry; ++c) {
      const int f = feature_pool[static_cast<std::size_t>(c)];
      const auto& ord = order[static_cast<std::size_t>(f)];
      std::int64_t wl = 0;
      std::int64_t wl1 = 0;
      for (Eigen::Index pos = node.begin; pos + 1 < node.end; ++pos) {
        const std::int32_t i = ord[static_cast<std::size_t>(pos)];
        const std::int32_t wi = weight[static_cast<std::size_t>(i)];
        wl += wi;
        wl1 += static_cast<std::int64_t>(wi) * y[i];
        const double v = x(i, f);
        const double v_next = x(ord[static_cast<std::size_t>(pos + 1)], f);
        if (v == v_next) continue;
        const std::int64_t wr = node.weight - wl;
        if (wl < min_leaf || wr < min_leaf) continue;
        const double score = children_score(wl, wl1, wr, node.weight1 - wl1);
        if (score > best_score) {
          // The cut sits on the left boundary value itself, so the
          // left-if-below-or-equal test commutes with any strictly
          // increasing feature transform for every input point.
          best_score = score;
          best_feature = f;
          best_threshold = v;
          best_wl = wl;
          best_wl1 = wl1;
        }
      }
    }

    if (best_feature < 0) {
      make_leaf(node);
      return;
    }

    const std::int64_t wr = node.weight - best_wl;
    const std::int64_t wr1 = node.weight1 - best_wl1;
    const double decrease =
        node_gini - (static_cast<double>(best_wl) * gini(best_wl, best_wl1) +
                     static_cast<double>(wr) * gini(wr, wr1)) /
                        static_cast<double>(node.weight);
    importance[static_cast<std::size_t>(best_feature)] +=
        (static_cast<double>(node.weight) / w_total) * decrease;

    // Partition every feature's span stably by the chosen test.
    const auto& best_ord = order[static_cast<std::size_t>(best_feature)];
    for (Eigen::Index pos = node.begin; pos < node.end; ++pos) {
      const std::int32_t i = best_ord[static_cast<std::size_t>(pos)];
      goes_left[static_cast<std::size_t>(i)] =
          x(i, best_feature) <= best_threshold ? 1 : 0;
    }
    Eigen::Index left_size = 0;
    for (auto& ord : order) {
      Eigen::Index lo = node.begin;
      Eigen::Index hi = 0;
      for (Eigen::Index pos = node.begin; pos < node.end; ++pos) {
        const std::int32_t i = ord[static_cast<std::size_t>(pos)];
        if (goes_left[static_cast<std::size_t>(i)]) {
          ord[static_cast<std::size_t>(lo++)] = i;
        } else {
          scratch[static_cast<std::size_t>(hi++)] = i;
        }
      }
      std::copy(scratch.begin(), scratch.begin() + hi, ord.begin() + lo);
      left_size = lo - node.begin;
    }

    const int left_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    const int right_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    auto& parent = tree.nodes[static_cast<std::size_t>(node.node_index)];
    parent.feature = best_feature;
    parent.threshold = best_threshold;
    parent.left = left_index;
    parent.right = right_index;

    stack.push_back({right_index, node.begin + left_size, node.end, node.depth + 1, wr, wr1});
    stack.push_back(
        {left_index, node.begin, node.begin + left_size, node.depth + 1, best_wl, best_wl1});
  }
};

void validate_training_inputs(const LabeledDataset& train, const RfHyper& hyper) {
  if (train.x.rows() < 2) throw ValidationError("rf_train: need at least 2 samples");
  if (hyper.n_estimators < 1 || hyper.max_depth < 1 || hyper.min_samples_leaf < 1 ||
      hyper.min_samples_split < 2) {
    throw ValidationError("rf_train: invalid hyperparameters");
  }
  bool has0 = false;
  bool has1 = false;
  for (Eigen::Index i = 0; i < train.y.size(); ++i) {
    if (train.y[i] == 0) has0 = true;
    else if (train.y[i] == 1) has1 = true;
    else throw ValidationError("rf_train: labels must be 0 or 1");
  }
  if (!has0 || !has1) {
    throw ValidationError("rf_train: training data must contain both classes");
  }
}

}  // namespace

RandomForestModel rf_train(const LabeledDataset& train, const RfHyper& hyper,
                           std::uint64_t seed) {
  validate_training_inputs(train, hyper);
  const Eigen::Index n = train.x.rows();
  const Eigen::Index d = train.x.cols();

  RandomForestModel model;
  model.hyper = hyper;
  model.seed = seed;
  model.n_features = static_cast<int>(d);
  model.feature_names = train.feature_names;
  const int mtry = hyper.features_per_split > 0
                       ? std::min(hyper.features_per_split, static_cast<int>(d))
                       : std::max(1, static_cast<int>(std::floor(std::sqrt(
                                          static_cast<double>(d)))));
  model.hyper.features_per_split = mtry;

  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> presorted(n, d);
  {
    std::vector<std::int32_t> idx(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < d; ++j) {
      std::iota(idx.begin(), idx.end(), 0);
      const auto* col = train.x.col(j).data();
      std::sort(idx.begin(), idx.end(), [col](std::int32_t a, std::int32_t b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
      for (Eigen::Index i = 0; i < n; ++i) presorted(i, j) = idx[static_cast<std::size_t>(i)];
    }
  }

  model.trees.resize(static_cast<std::size_t>(hyper.n_estimators));
  std::vector<std::vector<double>> tree_importance(
      static_cast<std::size_t>(hyper.n_estimators));
  parallel_for(static_cast<std::size_t>(hyper.n_estimators), worker_budget(),
               [&](std::size_t t) {
                 TreeBuilder builder(train.x, train.y, presorted, model.hyper, mtry,
                                     Rng::derived(seed, t + 1));
                 builder.build();
                 model.trees[t] = std::move(builder.tree);
                 tree_importance[t] = std::move(builder.importance);
               });

  model.importances = Vectord::Zero(d);
  for (const auto& imp : tree_importance) {
    for (Eigen::Index j = 0; j < d; ++j) {
      model.importances[j] += imp[static_cast<std::size_t>(j)];
    }
  }
  model.importances /= static_cast<double>(hyper.n_estimators);
  const double total = model.importances.sum();
  if (total > 0.0) model.importances /= total;
  return model;
}

RfPrediction rf_predict(const RandomForestModel& model, const Matrixd& x, double threshold) {
  if (x.cols() != model.n_features) {
    throw ValidationError("rf_predict: feature count mismatch");
  }
  if (model.trees.empty()) throw ValidationError("rf_predict: empty model");

  const Eigen::Index n = x.rows();
  RfPrediction out;
  out.probabilities = Vectord::Zero(n);
  for (const auto& tree : model.trees) {
    for (Eigen::Index i = 0; i < n; ++i) {
      int node = 0;
      while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& cur = tree.nodes[static_cast<std::size_t>(node)];
        node = x(i, cur.feature) <= cur.threshold ? cur.left : cur.right;
      }
      out.probabilities[i] += tree.nodes[static_cast<std::size_t>(node)].p1;
    }
  }
  out.probabilities /= static_cast<double>(model.trees.size());
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.labels[i] = out.probabilities[i] >= threshold ? 1 : 0;
  }
  return out;
}

ImportanceReport gini_importance(const LabeledDataset& dataset, const RfHyper& hyper,
                                 std::uint64_t seed) {
  const RandomForestModel model = rf_train(dataset, hyper, seed);
  ImportanceReport report;
  report.importance = model.importances;
  report.ranking.resize(static_cast<std::size_t>(model.n_features));
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::sort(report.ranking.begin(), report.ranking.end(), [&](int a, int b) {
    if (report.importance[a] != report.importance[b]) {
      return report.importance[a] > report.importance[b];
    }
    return a < b;
  });
  return report;
}

std::vector<int> select_by_cumulative_importance(const Vectord& importance, double cutoff) {
  if (!(cutoff > 0.0) || cutoff > 1.0) {
    throw ValidationError("select_by_cumulative_importance: cutoff must lie in (0,1]");
  }
  std::vector<int> ranked(static_cast<std::size_t>(importance.size()));
  std::iota(ranked.begin(), ranked.end(), 0);
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    if (importance[a] != importance[b]) return importance[a] > importance[b];
    return a < b;
  });
  std::vector<int> kept;
  double acc = 0.0;
  for (const int f : ranked) {
    kept.push_back(f);
    acc += importance[f];
    if (acc >= cutoff) break;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace twingrid::ml
