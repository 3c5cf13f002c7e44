// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "twingrid/errors.hpp"
#include "twingrid/ml/lstm.hpp"
#include "twingrid/rng.hpp"

using namespace twingrid;
using namespace twingrid::ml;

namespace {

// Sequences whose every step is the label in both features, plus noise.
LabeledDataset make_toy_sequences(Eigen::Index n, int window, int dim,
                                  std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset d;
  d.x.resize(n, static_cast<Eigen::Index>(window) * dim);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.y[i] = static_cast<int>(i % 2);
    const double level = d.y[i] == 1 ? 1.0 : -1.0;
    for (Eigen::Index c = 0; c < d.x.cols(); ++c) {
      d.x(i, c) = level + 0.05 * rng.normal();
    }
  }
  return d;
}

// Central finite difference of the batch loss along one parameter.
double numeric_grad(LstmModel& model, double& param, const Matrixd& x,
                    const Eigen::VectorXi& y) {
  const double h = 1e-5;
  const double saved = param;
  param = saved + h;
  const double up = lstm_batch_loss(model, x, y);
  param = saved - h;
  const double down = lstm_batch_loss(model, x, y);
  param = saved;
  return (up - down) / (2.0 * h);
}

double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

TEST_CASE("zero parameters always predict one half") {
  LstmConfig config;
  config.hidden = 4;
  config.window = 3;
  LstmModel model = lstm_init(config, 2, 1);
  model.w_x.setZero();
  model.w_h.setZero();
  model.b.setZero();
  model.w_out.setZero();
  model.b_out = 0.0;

  Rng rng(2);
  Matrixd x(5, 6);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = 10.0 * rng.normal();
  }
  const Vectord p = lstm_predict(model, x);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p[i] == 0.5);
}

TEST_CASE("analytic gradients match central finite differences") {
  for (const std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    CAPTURE(seed);
    LstmConfig config;
    config.hidden = 4;
    config.window = 3;
    LstmModel model = lstm_init(config, 2, seed);

    // Two-sequence toy batch with nonzero labels on both sides.
    Rng rng(seed * 1000 + 7);
    Matrixd x(2, 6);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    }
    Eigen::VectorXi y(2);
    y << 0, 1;

    const LstmGradients g = lstm_compute_gradients(model, x, y);
    double worst = 0.0;

    for (Eigen::Index i = 0; i < model.w_x.rows(); ++i) {
      for (Eigen::Index j = 0; j < model.w_x.cols(); ++j) {
        worst = std::max(worst,
                         rel_err(g.d_w_x(i, j), numeric_grad(model, model.w_x(i, j), x, y)));
      }
    }
    for (Eigen::Index i = 0; i < model.w_h.rows(); ++i) {
      for (Eigen::Index j = 0; j < model.w_h.cols(); ++j) {
        worst = std::max(worst,
                         rel_err(g.d_w_h(i, j), numeric_grad(model, model.w_h(i, j), x, y)));
      }
    }
    for (Eigen::Index i = 0; i < model.b.size(); ++i) {
      worst = std::max(worst, rel_err(g.d_b[i], numeric_grad(model, model.b[i], x, y)));
    }
    for (Eigen::Index i = 0; i < model.w_out.size(); ++i) {
      worst = std::max(worst,
                       rel_err(g.d_w_out[i], numeric_grad(model, model.w_out[i], x, y)));
    }
    worst = std::max(worst, rel_err(g.d_b_out, numeric_grad(model, model.b_out, x, y)));

    CHECK(worst < 1e-4);
  }
}

TEST_CASE("training drives the loss below 0.05 on separable sequences") {
  const LabeledDataset d = make_toy_sequences(8, 4, 2, 3);
  LstmConfig config;
  config.hidden = 8;
  config.window = 4;
  config.learning_rate = 1e-2;
  config.epochs = 200;
  config.batch = 8;
  config.dropout = 0.0;
  config.patience = 200;
  const LstmModel model = lstm_train(d, config, 5);
  const double loss = lstm_batch_loss(model, d.x, d.y);
  CHECK(loss < 0.05);

  // Predictions should put every sequence on the right side of the cut.
  const Vectord p = lstm_predict(model, d.x);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    CHECK((p[i] >= 0.5 ? 1 : 0) == d.y[i]);
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const LabeledDataset d = make_toy_sequences(16, 3, 2, 9);
  LstmConfig config;
  config.hidden = 6;
  config.window = 3;
  config.epochs = 5;
  config.batch = 4;
  const LstmModel a = lstm_train(d, config, 77);
  const LstmModel b = lstm_train(d, config, 77);
  CHECK((a.w_x.array() == b.w_x.array()).all());
  CHECK((a.w_h.array() == b.w_h.array()).all());
  CHECK((a.b.array() == b.b.array()).all());
  CHECK((a.w_out.array() == b.w_out.array()).all());
  CHECK(a.b_out == b.b_out);
  CHECK(a.epochs_run == b.epochs_run);
  CHECK(a.best_val_loss == b.best_val_loss);
}

TEST_CASE("exploding updates raise a divergence error naming the epoch") {
  const LabeledDataset d = make_toy_sequences(8, 2, 2, 13);
  LstmConfig config;
  config.hidden = 4;
  config.window = 2;
  config.learning_rate = 1e10;
  config.weight_decay = 1e10;  // decay factor far outside the stable region
  config.epochs = 50;
  config.batch = 8;
  config.dropout = 0.0;
  config.patience = 50;
  try {
    lstm_train(d, config, 1);
    FAIL("expected a divergence error");
  } catch (const RuntimeFailure& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    CHECK(std::string(e.what()).find("batch") != std::string::npos);
  }
}

TEST_CASE("early stopping restores the best-validation weights") {
  const LabeledDataset d = make_toy_sequences(24, 3, 2, 21);
  LstmConfig config;
  config.hidden = 6;
  config.window = 3;
  config.learning_rate = 5e-3;
  config.epochs = 60;
  config.batch = 8;
  config.patience = 5;
  const LstmModel model = lstm_train(d, config, 4);
  CHECK(model.epochs_run <= 60);
  CHECK(std::isfinite(model.best_val_loss));
  CHECK(model.best_val_loss >= 0.0);
}

TEST_CASE("lstm input validation") {
  LstmConfig config;
  config.hidden = 4;
  config.window = 3;

  SUBCASE("row length must be a multiple of the window") {
    LabeledDataset d;
    d.x = Matrixd::Zero(4, 7);
    d.y = Eigen::VectorXi::Zero(4);
    d.y[1] = 1;
    CHECK_THROWS_AS(lstm_train(d, config, 1), ValidationError);
  }
  SUBCASE("labels must be binary") {
    LabeledDataset d;
    d.x = Matrixd::Zero(4, 6);
    d.y = Eigen::VectorXi::Zero(4);
    d.y[0] = 3;
    CHECK_THROWS_AS(lstm_train(d, config, 1), ValidationError);
  }
  SUBCASE("config bounds") {
    const LabeledDataset d = make_toy_sequences(8, 3, 2, 1);
    LstmConfig bad = config;
    bad.dropout = 1.0;
    CHECK_THROWS_AS(lstm_train(d, bad, 1), ValidationError);
    bad = config;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(lstm_train(d, bad, 1), ValidationError);
    bad = config;
    bad.val_frac = 0.0;
    CHECK_THROWS_AS(lstm_train(d, bad, 1), ValidationError);
  }
  SUBCASE("predict row length mismatch") {
    const LstmModel model = lstm_init(config, 2, 1);
    CHECK_THROWS_AS(lstm_predict(model, Matrixd::Zero(2, 5)), ValidationError);
  }
}
