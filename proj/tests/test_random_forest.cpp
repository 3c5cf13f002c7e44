// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "twingrid/errors.hpp"
#include "twingrid/ml/random_forest.hpp"
#include "twingrid/parallel.hpp"
#include "twingrid/rng.hpp"

using namespace twingrid;
using namespace twingrid::ml;

namespace {

// Two Gaussian blobs, class 0 at the origin and class 1 at (5,5).
LabeledDataset make_blobs(Eigen::Index per_class, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset d;
  d.x.resize(2 * per_class, 2);
  d.y.resize(2 * per_class);
  for (Eigen::Index i = 0; i < per_class; ++i) {
    d.x(i, 0) = rng.normal();
    d.x(i, 1) = rng.normal();
    d.y[i] = 0;
    d.x(per_class + i, 0) = 5.0 + rng.normal();
    d.x(per_class + i, 1) = 5.0 + rng.normal();
    d.y[per_class + i] = 1;
  }
  d.feature_names = {"f0", "f1"};
  return d;
}

// Oracle: scans each feature for a threshold that fully separates classes.
bool axis_separable(const LabeledDataset& d) {
  for (Eigen::Index j = 0; j < d.features(); ++j) {
    double max0 = -1e300;
    double min0 = 1e300;
    double max1 = -1e300;
    double min1 = 1e300;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double v = d.x(i, j);
      if (d.y[i] == 0) {
        max0 = std::max(max0, v);
        min0 = std::min(min0, v);
      } else {
        max1 = std::max(max1, v);
        min1 = std::min(min1, v);
      }
    }
    if (max0 < min1 || max1 < min0) return true;
  }
  return false;
}

// Oracle: best accuracy achievable by any single axis-aligned threshold.
double best_stump_accuracy(const LabeledDataset& d) {
  double best = 0.0;
  const auto n = static_cast<double>(d.size());
  for (Eigen::Index j = 0; j < d.features(); ++j) {
    std::vector<double> values;
    for (Eigen::Index i = 0; i < d.size(); ++i) values.push_back(d.x(i, j));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> cuts = {values.front() - 1.0};
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      cuts.push_back(0.5 * (values[k] + values[k + 1]));
    }
    for (const double cut : cuts) {
      Eigen::Index left1 = 0;
      Eigen::Index left = 0;
      Eigen::Index total1 = 0;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        total1 += d.y[i];
        if (d.x(i, j) <= cut) {
          ++left;
          left1 += d.y[i];
        }
      }
      const Eigen::Index right1 = total1 - left1;
      const Eigen::Index right = d.size() - left;
      // Try both label assignments for the two sides.
      const auto correct_a = (left - left1) + right1;
      const auto correct_b = left1 + (right - right1);
      best = std::max(best, static_cast<double>(std::max(correct_a, correct_b)) / n);
    }
  }
  return best;
}

// Oracle: exhaustive best weighted-Gini split over all features/thresholds.
// Returns the winning feature index on the full (unweighted) dataset.
int exhaustive_best_split_feature(const LabeledDataset& d) {
  double best_score = -1.0;
  int best_feature = -1;
  for (Eigen::Index j = 0; j < d.features(); ++j) {
    std::vector<std::pair<double, int>> rows;
    for (Eigen::Index i = 0; i < d.size(); ++i) rows.push_back({d.x(i, j), d.y[i]});
    std::sort(rows.begin(), rows.end());
    double left1 = 0;
    double total1 = 0;
    for (const auto& [v, label] : rows) total1 += label;
    const auto n = static_cast<double>(d.size());
    double left = 0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      left += 1.0;
      left1 += rows[k].second;
      if (rows[k].first == rows[k + 1].first) continue;
      const double right = n - left;
      const double right1 = total1 - left1;
      const double score =
          ((left - left1) * (left - left1) + left1 * left1) / left +
          ((right - right1) * (right - right1) + right1 * right1) / right;
      if (score > best_score) {
        best_score = score;
        best_feature = static_cast<int>(j);
      }
    }
  }
  return best_feature;
}

}  // namespace

TEST_CASE("forest separates two blobs verified separable by the axis oracle") {
  const LabeledDataset d = make_blobs(100, 17);
  REQUIRE(axis_separable(d));

  RfHyper hyper;
  hyper.n_estimators = 30;
  const RandomForestModel model = rf_train(d, hyper, 42);
  const RfPrediction pred = rf_predict(model, d.x);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (pred.labels[i] == d.y[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(d.size()) >= 0.99);
}

TEST_CASE("depth-1 forest cannot learn XOR, matching the stump oracle") {
  Rng rng(23);
  LabeledDataset d;
  d.x.resize(200, 2);
  d.y.resize(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const int a = static_cast<int>(rng.uniform_int(2));
    const int b = static_cast<int>(rng.uniform_int(2));
    d.x(i, 0) = static_cast<double>(a) + 0.1 * rng.normal();
    d.x(i, 1) = static_cast<double>(b) + 0.1 * rng.normal();
    d.y[i] = a ^ b;
  }
  d.feature_names = {"f0", "f1"};

  // No single axis cut beats chance by much on XOR.
  CHECK(best_stump_accuracy(d) < 0.62);

  RfHyper hyper;
  hyper.n_estimators = 50;
  hyper.max_depth = 1;
  hyper.min_samples_split = 2;
  hyper.min_samples_leaf = 1;
  const RandomForestModel model = rf_train(d, hyper, 7);
  const RfPrediction pred = rf_predict(model, d.x);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (pred.labels[i] == d.y[i]) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / 200.0;
  CHECK(accuracy > 0.4);
  CHECK(accuracy < 0.62);
}

TEST_CASE("fully grown single tree memorizes its in-bag points") {
  const LabeledDataset d = make_blobs(40, 31);
  RfHyper hyper;
  hyper.n_estimators = 1;
  hyper.max_depth = 64;
  hyper.min_samples_split = 2;
  hyper.min_samples_leaf = 1;
  const std::uint64_t seed = 11;
  const RandomForestModel model = rf_train(d, hyper, seed);

  // The documented sampling discipline: tree t draws its bootstrap as the
  // first n uniform_int(n) calls of the rng derived from (seed, t+1).
  Rng tree_rng = Rng::derived(seed, 1);
  std::vector<bool> in_bag(static_cast<std::size_t>(d.size()), false);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    in_bag[tree_rng.uniform_int(static_cast<std::uint64_t>(d.size()))] = true;
  }

  const RfPrediction pred = rf_predict(model, d.x);
  Eigen::Index covered = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!in_bag[static_cast<std::size_t>(i)]) continue;
    ++covered;
    CHECK(pred.labels[i] == d.y[i]);
  }
  CHECK(covered > 0);
}

TEST_CASE("gini importance ranks the separating feature first") {
  // Feature 0 separates perfectly; feature 1 is noise. 32 samples.
  Rng rng(3);
  LabeledDataset d;
  d.x.resize(32, 2);
  d.y.resize(32);
  for (Eigen::Index i = 0; i < 32; ++i) {
    d.y[i] = i < 16 ? 0 : 1;
    d.x(i, 0) = d.y[i] == 0 ? rng.uniform() : 2.0 + rng.uniform();
    d.x(i, 1) = rng.normal();
  }
  d.feature_names = {"signal", "noise"};

  CHECK(exhaustive_best_split_feature(d) == 0);

  RfHyper hyper;
  hyper.n_estimators = 20;
  hyper.min_samples_split = 2;
  hyper.min_samples_leaf = 1;
  hyper.features_per_split = 2;
  const ImportanceReport report = gini_importance(d, hyper, 5);
  CHECK(report.importance[0] > report.importance[1]);
  CHECK(report.ranking[0] == 0);
  CHECK(std::abs(report.importance.sum() - 1.0) < 1e-12);
}

TEST_CASE("pure-noise feature ranks below informative features across seeds") {
  for (const std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    Rng rng(100 + seed);
    LabeledDataset d = make_blobs(60, 200 + seed);
    LabeledDataset with_noise;
    with_noise.x.resize(d.size(), 3);
    with_noise.x.leftCols(2) = d.x;
    for (Eigen::Index i = 0; i < d.size(); ++i) with_noise.x(i, 2) = rng.normal();
    with_noise.y = d.y;
    with_noise.feature_names = {"f0", "f1", "noise"};

    RfHyper hyper;
    hyper.n_estimators = 25;
    const ImportanceReport report = gini_importance(with_noise, hyper, seed);
    CHECK(report.importance[2] < report.importance[0]);
    CHECK(report.importance[2] < report.importance[1]);
  }
}

TEST_CASE("strictly increasing feature transforms leave predictions unchanged") {
  const LabeledDataset d = make_blobs(50, 47);
  LabeledDataset warped = d;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    warped.x(i, 0) = std::exp(0.4 * d.x(i, 0));
    warped.x(i, 1) = std::pow(d.x(i, 1), 3.0) + 2.0 * d.x(i, 1);
  }

  RfHyper hyper;
  hyper.n_estimators = 15;
  const RandomForestModel base = rf_train(d, hyper, 99);
  const RandomForestModel trans = rf_train(warped, hyper, 99);
  const RfPrediction pred_base = rf_predict(base, d.x);
  const RfPrediction pred_trans = rf_predict(trans, warped.x);
  CHECK((pred_base.labels.array() == pred_trans.labels.array()).all());
  CHECK((pred_base.probabilities.array() == pred_trans.probabilities.array()).all());
}

TEST_CASE("training is independent of the worker count") {
  const LabeledDataset d = make_blobs(40, 53);
  RfHyper hyper;
  hyper.n_estimators = 8;

  setenv("TWINGRID_THREADS", "1", 1);
  const RandomForestModel serial = rf_train(d, hyper, 321);
  setenv("TWINGRID_THREADS", "4", 1);
  const RandomForestModel parallel = rf_train(d, hyper, 321);
  unsetenv("TWINGRID_THREADS");

  REQUIRE(serial.trees.size() == parallel.trees.size());
  for (std::size_t t = 0; t < serial.trees.size(); ++t) {
    const auto& a = serial.trees[t].nodes;
    const auto& b = parallel.trees[t].nodes;
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].feature == b[k].feature);
      CHECK(a[k].threshold == b[k].threshold);
      CHECK(a[k].left == b[k].left);
      CHECK(a[k].right == b[k].right);
      CHECK(a[k].p1 == b[k].p1);
    }
  }
  CHECK((serial.importances.array() == parallel.importances.array()).all());
}

TEST_CASE("parallel_for results do not depend on the worker count") {
  std::vector<double> out_serial(100);
  std::vector<double> out_parallel(100);
  auto fill = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      Rng rng = Rng::derived(77, i + 1);
      out[i] = rng.normal() + rng.uniform();
    };
  };
  parallel_for(100, 1, fill(out_serial));
  parallel_for(100, 3, fill(out_parallel));
  CHECK(out_serial == out_parallel);
}

TEST_CASE("forest respects depth and leaf-size limits") {
  const LabeledDataset d = make_blobs(100, 61);
  RfHyper hyper;
  hyper.n_estimators = 10;
  hyper.max_depth = 3;
  const RandomForestModel model = rf_train(d, hyper, 5);

  for (const auto& tree : model.trees) {
    // Walk each tree measuring depth.
    std::function<int(int)> depth_of = [&](int node) -> int {
      const auto& n = tree.nodes[static_cast<std::size_t>(node)];
      if (n.feature < 0) return 0;
      return 1 + std::max(depth_of(n.left), depth_of(n.right));
    };
    CHECK(depth_of(0) <= 3);
  }
}

TEST_CASE("rf input validation") {
  LabeledDataset single;
  single.x = Matrixd::Random(10, 2);
  single.y = Eigen::VectorXi::Zero(10);
  single.feature_names = {"a", "b"};
  RfHyper hyper;

  SUBCASE("single-class data rejected") {
    CHECK_THROWS_AS(rf_train(single, hyper, 1), ValidationError);
  }
  SUBCASE("non-binary labels rejected") {
    single.y[3] = 2;
    CHECK_THROWS_AS(rf_train(single, hyper, 1), ValidationError);
  }
  SUBCASE("bad hyperparameters rejected") {
    const LabeledDataset d = make_blobs(10, 71);
    RfHyper bad;
    bad.n_estimators = 0;
    CHECK_THROWS_AS(rf_train(d, bad, 1), ValidationError);
    bad = RfHyper{};
    bad.min_samples_split = 1;
    CHECK_THROWS_AS(rf_train(d, bad, 1), ValidationError);
  }
  SUBCASE("predict feature-count mismatch rejected") {
    const LabeledDataset d = make_blobs(10, 73);
    const RandomForestModel model = rf_train(d, hyper, 1);
    CHECK_THROWS_AS(rf_predict(model, Matrixd::Zero(2, 3)), ValidationError);
  }
}

TEST_CASE("cumulative importance selection") {
  Vectord importance(4);
  importance << 0.5, 0.3, 0.15, 0.05;
  CHECK(select_by_cumulative_importance(importance, 0.79) == std::vector<int>{0, 1});
  CHECK(select_by_cumulative_importance(importance, 0.80) == std::vector<int>{0, 1});
  CHECK(select_by_cumulative_importance(importance, 0.81) == std::vector<int>{0, 1, 2});
  CHECK(select_by_cumulative_importance(importance, 1.0) ==
        std::vector<int>{0, 1, 2, 3});
  CHECK(select_by_cumulative_importance(importance, 0.1) == std::vector<int>{0});
  CHECK_THROWS_AS(select_by_cumulative_importance(importance, 0.0), ValidationError);
  CHECK_THROWS_AS(select_by_cumulative_importance(importance, 1.5), ValidationError);
}
