// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/ml/dataset.hpp"

namespace twingrid::ml {

struct LstmConfig {
  int hidden = 32;
  int window = 20;           // steps per sequence; row length must be window * input_dim
  double learning_rate = 1e-3;
  int epochs = 100;
  int batch = 256;
  double dropout = 0.2;      // applied to the final hidden state during training
  double weight_decay = 1e-4;
  int patience = 10;         // early-stopping patience on validation loss
  double val_frac = 0.15;    // fraction held out for early stopping
};

/// Single-layer LSTM with a sigmoid dense head. Gate rows are stacked in the
/// order input, forget, cell candidate, output (each `hidden` rows).
struct LstmModel {
  LstmConfig config;
  std::uint64_t seed = 0;
  int input_dim = 0;
  Matrixd w_x;   // 4H x d
  Matrixd w_h;   // 4H x H
  Vectord b;     // 4H, forget-gate rows initialized to 1
  Vectord w_out; // H
  double b_out = 0.0;
  int epochs_run = 0;
  double best_val_loss = 0.0;
};

struct LstmGradients {
  Matrixd d_w_x;
  Matrixd d_w_h;
  Vectord d_b;
  Vectord d_w_out;
  double d_b_out = 0.0;
};

/// Builds a model with seeded uniform weight init (forget bias 1) without
/// training it. Exposed for the gradient tests.
LstmModel lstm_init(const LstmConfig& config, int input_dim, std::uint64_t seed);

/// Trains with Adam (beta1 0.9, beta2 0.999, eps 1e-8), decoupled weight decay
/// on the weight matrices, seeded mini-batch shuffles, inverted dropout on the
/// final hidden state, and early stopping that restores the best-epoch
/// weights. Rows of `sequences.x` are windows flattened time-major. Throws a
/// runtime error naming epoch and batch if the loss leaves the finite range.
LstmModel lstm_train(const LabeledDataset& sequences, const LstmConfig& config,
                     std::uint64_t seed);

/// Class-1 probability per sequence; no dropout at inference.
Vectord lstm_predict(const LstmModel& model, const Matrixd& x);

/// Mean binary cross-entropy of the model on a batch, no dropout or decay.
/// Pairs with lstm_compute_gradients for finite-difference verification.
double lstm_batch_loss(const LstmModel& model, const Matrixd& x,
                       const Eigen::VectorXi& y);

/// Analytic gradients of lstm_batch_loss with respect to every parameter.
LstmGradients lstm_compute_gradients(const LstmModel& model, const Matrixd& x,
                                     const Eigen::VectorXi& y);

}  // namespace twingrid::ml
