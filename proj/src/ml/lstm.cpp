// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "twingrid/errors.hpp"
#include "twingrid/rng.hpp"

namespace twingrid::ml {

namespace {

Matrixd sigmoid(const Matrixd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

// One training batch's stashed activations, indexed by time step.
struct Stash {
  std::vector<Matrixd> x;       // d x B
  std::vector<Matrixd> gate_i;  // H x B
  std::vector<Matrixd> gate_f;
  std::vector<Matrixd> gate_g;
  std::vector<Matrixd> gate_o;
  std::vector<Matrixd> cell;
  std::vector<Matrixd> tanh_cell;
  std::vector<Matrixd> hidden;  // hidden[t] is the state after step t
};

// Gathers step t of the selected rows into a d x B matrix.
Matrixd gather_step(const Matrixd& x, const std::vector<Eigen::Index>& rows, int t, int d) {
  Matrixd out(d, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t b = 0; b < rows.size(); ++b) {
    out.col(static_cast<Eigen::Index>(b)) =
        x.row(rows[b]).segment(static_cast<Eigen::Index>(t) * d, d).transpose();
  }
  return out;
}

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

// Runs the recurrence over a batch and returns logits (length B). When a
// stash is supplied every intermediate needed by backward() is recorded.
// `mask` (H x B), if present, multiplies the final hidden state (dropout).
Vectord forward(const LstmModel& model, const Matrixd& x,
                const std::vector<Eigen::Index>& rows, const Matrixd* mask,
                Stash* stash) {
  const int h_dim = model.config.hidden;
  const int d = model.input_dim;
  const int window = model.config.window;
  const auto batch = static_cast<Eigen::Index>(rows.size());

  Matrixd hidden = Matrixd::Zero(h_dim, batch);
  Matrixd cell = Matrixd::Zero(h_dim, batch);
  if (stash) {
    stash->x.resize(static_cast<std::size_t>(window));
    stash->gate_i.resize(static_cast<std::size_t>(window));
    stash->gate_f.resize(static_cast<std::size_t>(window));
    stash->gate_g.resize(static_cast<std::size_t>(window));
    stash->gate_o.resize(static_cast<std::size_t>(window));
    stash->cell.resize(static_cast<std::size_t>(window));
    stash->tanh_cell.resize(static_cast<std::size_t>(window));
    stash->hidden.resize(static_cast<std::size_t>(window));
  }

  Matrixd gates(4 * h_dim, batch);
  for (int t = 0; t < window; ++t) {
    Matrixd x_t = gather_step(x, rows, t, d);
    gates.noalias() = model.w_x * x_t + model.w_h * hidden;
    gates.colwise() += model.b;
    Matrixd gi = sigmoid(gates.middleRows(0, h_dim));
    Matrixd gf = sigmoid(gates.middleRows(h_dim, h_dim));
    Matrixd gg = gates.middleRows(2 * h_dim, h_dim).array().tanh().matrix();
    Matrixd go = sigmoid(gates.middleRows(3 * h_dim, h_dim));
    cell = gf.cwiseProduct(cell) + gi.cwiseProduct(gg);
    Matrixd tanh_c = cell.array().tanh().matrix();
    hidden = go.cwiseProduct(tanh_c);
    if (stash) {
      auto idx = static_cast<std::size_t>(t);
      stash->x[idx] = std::move(x_t);
      stash->gate_i[idx] = std::move(gi);
      stash->gate_f[idx] = std::move(gf);
      stash->gate_g[idx] = std::move(gg);
      stash->gate_o[idx] = std::move(go);
      stash->cell[idx] = cell;
      stash->tanh_cell[idx] = std::move(tanh_c);
      stash->hidden[idx] = hidden;
    }
  }

  if (mask) hidden = hidden.cwiseProduct(*mask);
  return (model.w_out.transpose() * hidden).transpose().array() + model.b_out;
}

// Numerically stable binary cross-entropy from logits, averaged over the batch.
double bce_from_logits(const Vectord& z, const Eigen::VectorXi& y,
                       const std::vector<Eigen::Index>& rows) {
  double total = 0.0;
  for (Eigen::Index b = 0; b < z.size(); ++b) {
    const double zb = z[b];
    const double yb = static_cast<double>(y[rows[static_cast<std::size_t>(b)]]);
    total += std::max(zb, 0.0) - zb * yb + std::log1p(std::exp(-std::abs(zb)));
  }
  return total / static_cast<double>(z.size());
}

// Backpropagation through time. `mask` must match the forward pass.
LstmGradients backward(const LstmModel& model, const Stash& stash, const Vectord& z,
                       const Eigen::VectorXi& y, const std::vector<Eigen::Index>& rows,
                       const Matrixd* mask) {
  const int h_dim = model.config.hidden;
  const int window = model.config.window;
  const auto batch = static_cast<Eigen::Index>(rows.size());
  const double inv_b = 1.0 / static_cast<double>(batch);

  LstmGradients g;
  g.d_w_x = Matrixd::Zero(model.w_x.rows(), model.w_x.cols());
  g.d_w_h = Matrixd::Zero(model.w_h.rows(), model.w_h.cols());
  g.d_b = Vectord::Zero(model.b.size());
  g.d_w_out = Vectord::Zero(model.w_out.size());

  Vectord dz(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double p = 1.0 / (1.0 + std::exp(-z[b]));
    dz[b] = (p - static_cast<double>(y[rows[static_cast<std::size_t>(b)]])) * inv_b;
  }

  const Matrixd& h_last = stash.hidden[static_cast<std::size_t>(window - 1)];
  Matrixd h_head = mask ? h_last.cwiseProduct(*mask) : h_last;
  g.d_w_out = h_head * dz;
  g.d_b_out = dz.sum();

  Matrixd d_hidden = model.w_out * dz.transpose();
  if (mask) d_hidden = d_hidden.cwiseProduct(*mask);
  Matrixd d_cell = Matrixd::Zero(h_dim, batch);
  Matrixd d_gates(4 * h_dim, batch);
  const Matrixd zero_cell = Matrixd::Zero(h_dim, batch);

  for (int t = window - 1; t >= 0; --t) {
    const auto idx = static_cast<std::size_t>(t);
    const Matrixd& gi = stash.gate_i[idx];
    const Matrixd& gf = stash.gate_f[idx];
    const Matrixd& gg = stash.gate_g[idx];
    const Matrixd& go = stash.gate_o[idx];
    const Matrixd& tanh_c = stash.tanh_cell[idx];

    Matrixd d_o = d_hidden.cwiseProduct(tanh_c);
    d_cell.array() +=
        d_hidden.array() * go.array() * (1.0 - tanh_c.array().square());
    const Matrixd& cell_prev = t > 0 ? stash.cell[idx - 1] : zero_cell;
    Matrixd d_f = d_cell.cwiseProduct(cell_prev);
    Matrixd d_i = d_cell.cwiseProduct(gg);
    Matrixd d_g = d_cell.cwiseProduct(gi);

    d_gates.middleRows(0, h_dim) =
        (d_i.array() * gi.array() * (1.0 - gi.array())).matrix();
    d_gates.middleRows(h_dim, h_dim) =
        (d_f.array() * gf.array() * (1.0 - gf.array())).matrix();
    d_gates.middleRows(2 * h_dim, h_dim) =
        (d_g.array() * (1.0 - gg.array().square())).matrix();
    d_gates.middleRows(3 * h_dim, h_dim) =
        (d_o.array() * go.array() * (1.0 - go.array())).matrix();

    g.d_w_x.noalias() += d_gates * stash.x[idx].transpose();
    if (t > 0) g.d_w_h.noalias() += d_gates * stash.hidden[idx - 1].transpose();
    g.d_b += d_gates.rowwise().sum();

    d_cell = d_cell.cwiseProduct(gf);
    d_hidden.noalias() = model.w_h.transpose() * d_gates;
  }
  return g;
}

struct AdamSlot {
  Matrixd m;
  Matrixd v;
};

void adam_update(Matrixd& param, const Matrixd& grad, AdamSlot& slot, double lr,
                 double bias1, double bias2, double decay) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  slot.m = kBeta1 * slot.m + (1.0 - kBeta1) * grad;
  slot.v = (kBeta2 * slot.v.array() + (1.0 - kBeta2) * grad.array().square()).matrix();
  param.array() -= lr * (slot.m.array() / bias1) /
                   ((slot.v.array() / bias2).sqrt() + kEps);
  if (decay > 0.0) param *= 1.0 - lr * decay;
}

void validate_config(const LstmConfig& c) {
  if (c.hidden < 1) throw ValidationError("lstm: hidden size must be >= 1");
  if (c.window < 1) throw ValidationError("lstm: window must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ValidationError("lstm: learning rate must be > 0");
  if (c.epochs < 1) throw ValidationError("lstm: epochs must be >= 1");
  if (c.batch < 1) throw ValidationError("lstm: batch size must be >= 1");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) {
    throw ValidationError("lstm: dropout must lie in [0,1)");
  }
  if (c.weight_decay < 0.0) throw ValidationError("lstm: weight decay must be >= 0");
  if (c.patience < 1) throw ValidationError("lstm: patience must be >= 1");
  if (!(c.val_frac > 0.0 && c.val_frac < 1.0)) {
    throw ValidationError("lstm: val_frac must lie in (0,1)");
  }
}

int derive_input_dim(const LstmConfig& c, Eigen::Index row_len) {
  if (row_len <= 0 || row_len % c.window != 0) {
    throw ValidationError(
        "lstm: sequence row length must be a positive multiple of the window");
  }
  return static_cast<int>(row_len / c.window);
}

}  // namespace

LstmModel lstm_init(const LstmConfig& config, int input_dim, std::uint64_t seed) {
  validate_config(config);
  if (input_dim < 1) throw ValidationError("lstm: input dimension must be >= 1");

  LstmModel model;
  model.config = config;
  model.seed = seed;
  model.input_dim = input_dim;
  const int h_dim = config.hidden;
  model.w_x.resize(4 * h_dim, input_dim);
  model.w_h.resize(4 * h_dim, h_dim);
  model.b = Vectord::Zero(4 * h_dim);
  model.b.segment(h_dim, h_dim).setOnes();  // forget-gate bias
  model.w_out.resize(h_dim);
  model.b_out = 0.0;

  Rng rng = Rng::derived(seed, 1);
  const double sx = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double sh = 1.0 / std::sqrt(static_cast<double>(h_dim));
  for (Eigen::Index i = 0; i < model.w_x.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.w_x.cols(); ++j) {
      model.w_x(i, j) = (2.0 * rng.uniform() - 1.0) * sx;
    }
  }
  for (Eigen::Index i = 0; i < model.w_h.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.w_h.cols(); ++j) {
      model.w_h(i, j) = (2.0 * rng.uniform() - 1.0) * sh;
    }
  }
  for (Eigen::Index i = 0; i < model.w_out.size(); ++i) {
    model.w_out[i] = (2.0 * rng.uniform() - 1.0) * sh;
  }
  return model;
}

LstmModel lstm_train(const LabeledDataset& sequences, const LstmConfig& config,
                     std::uint64_t seed) {
  validate_config(config);
  const Eigen::Index n = sequences.x.rows();
  if (n < 2) throw ValidationError("lstm_train: need at least 2 sequences");
  for (Eigen::Index i = 0; i < sequences.y.size(); ++i) {
    if (sequences.y[i] != 0 && sequences.y[i] != 1) {
      throw ValidationError("lstm_train: labels must be 0 or 1");
    }
  }
  const int input_dim = derive_input_dim(config, sequences.x.cols());

  LstmModel model = lstm_init(config, input_dim, seed);

  // Held-out tail of a seeded shuffle provides the early-stopping set.
  auto indices = all_rows(n);
  Rng rng_split = Rng::derived(seed, 2);
  rng_split.shuffle(indices);
  Eigen::Index n_val = static_cast<Eigen::Index>(
      std::llround(config.val_frac * static_cast<double>(n)));
  n_val = std::clamp<Eigen::Index>(n_val, 1, n - 1);
  std::vector<Eigen::Index> val_rows(indices.begin(), indices.begin() + n_val);
  std::vector<Eigen::Index> train_rows(indices.begin() + n_val, indices.end());

  const int h_dim = config.hidden;
  AdamSlot slot_wx{Matrixd::Zero(4 * h_dim, input_dim), Matrixd::Zero(4 * h_dim, input_dim)};
  AdamSlot slot_wh{Matrixd::Zero(4 * h_dim, h_dim), Matrixd::Zero(4 * h_dim, h_dim)};
  AdamSlot slot_b{Matrixd::Zero(4 * h_dim, 1), Matrixd::Zero(4 * h_dim, 1)};
  AdamSlot slot_wo{Matrixd::Zero(h_dim, 1), Matrixd::Zero(h_dim, 1)};
  AdamSlot slot_bo{Matrixd::Zero(1, 1), Matrixd::Zero(1, 1)};

  Rng rng_train = Rng::derived(seed, 3);
  double best_val = std::numeric_limits<double>::infinity();
  LstmModel best = model;
  int stale_epochs = 0;
  long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng_train.shuffle(train_rows);
    const auto n_train = static_cast<Eigen::Index>(train_rows.size());
    for (Eigen::Index start = 0; start < n_train; start += config.batch) {
      const Eigen::Index stop = std::min<Eigen::Index>(start + config.batch, n_train);
      std::vector<Eigen::Index> rows(train_rows.begin() + start, train_rows.begin() + stop);
      const auto batch = static_cast<Eigen::Index>(rows.size());

      Matrixd mask;
      const Matrixd* mask_ptr = nullptr;
      if (config.dropout > 0.0) {
        mask.resize(h_dim, batch);
        const double keep = 1.0 - config.dropout;
        for (Eigen::Index i = 0; i < h_dim; ++i) {
          for (Eigen::Index b = 0; b < batch; ++b) {
            mask(i, b) = rng_train.uniform() < keep ? 1.0 / keep : 0.0;
          }
        }
        mask_ptr = &mask;
      }

      Stash stash;
      const Vectord z = forward(model, sequences.x, rows, mask_ptr, &stash);
      const double loss = bce_from_logits(z, sequences.y, rows);
      if (!std::isfinite(loss)) {
        throw RuntimeFailure("lstm_train: loss diverged at epoch " +
                             std::to_string(epoch + 1) + ", batch " +
                             std::to_string(start / config.batch + 1));
      }

      const LstmGradients grads =
          backward(model, stash, z, sequences.y, rows, mask_ptr);
      ++step;
      const double bias1 = 1.0 - std::pow(0.9, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(0.999, static_cast<double>(step));
      const double lr = config.learning_rate;
      adam_update(model.w_x, grads.d_w_x, slot_wx, lr, bias1, bias2, config.weight_decay);
      adam_update(model.w_h, grads.d_w_h, slot_wh, lr, bias1, bias2, config.weight_decay);
      Matrixd b_mat = model.b;
      adam_update(b_mat, Matrixd(grads.d_b), slot_b, lr, bias1, bias2, 0.0);
      model.b = b_mat;
      Matrixd wo_mat = model.w_out;
      adam_update(wo_mat, Matrixd(grads.d_w_out), slot_wo, lr, bias1, bias2,
                  config.weight_decay);
      model.w_out = wo_mat;
      Matrixd bo_mat(1, 1);
      bo_mat(0, 0) = model.b_out;
      Matrixd bo_grad(1, 1);
      bo_grad(0, 0) = grads.d_b_out;
      adam_update(bo_mat, bo_grad, slot_bo, lr, bias1, bias2, 0.0);
      model.b_out = bo_mat(0, 0);
    }

    const Vectord z_val = forward(model, sequences.x, val_rows, nullptr, nullptr);
    const double val_loss = bce_from_logits(z_val, sequences.y, val_rows);
    if (!std::isfinite(val_loss)) {
      throw RuntimeFailure("lstm_train: validation loss diverged at epoch " +
                           std::to_string(epoch + 1) + ", batch 0");
    }
    model.epochs_run = epoch + 1;
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      stale_epochs = 0;
    } else if (++stale_epochs >= config.patience) {
      break;
    }
  }

  best.epochs_run = model.epochs_run;
  best.best_val_loss = best_val;
  return best;
}

Vectord lstm_predict(const LstmModel& model, const Matrixd& x) {
  if (model.input_dim < 1 || model.w_x.size() == 0) {
    throw ValidationError("lstm_predict: model is not initialized");
  }
  if (x.cols() != static_cast<Eigen::Index>(model.config.window) * model.input_dim) {
    throw ValidationError("lstm_predict: sequence row length mismatch");
  }
  const Vectord z = forward(model, x, all_rows(x.rows()), nullptr, nullptr);
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

double lstm_batch_loss(const LstmModel& model, const Matrixd& x,
                       const Eigen::VectorXi& y) {
  if (x.rows() != y.size()) throw ValidationError("lstm_batch_loss: length mismatch");
  if (x.cols() != static_cast<Eigen::Index>(model.config.window) * model.input_dim) {
    throw ValidationError("lstm_batch_loss: sequence row length mismatch");
  }
  const auto rows = all_rows(x.rows());
  const Vectord z = forward(model, x, rows, nullptr, nullptr);
  return bce_from_logits(z, y, rows);
}

LstmGradients lstm_compute_gradients(const LstmModel& model, const Matrixd& x,
                                     const Eigen::VectorXi& y) {
  if (x.rows() != y.size()) {
    throw ValidationError("lstm_compute_gradients: length mismatch");
  }
  if (x.cols() != static_cast<Eigen::Index>(model.config.window) * model.input_dim) {
    throw ValidationError("lstm_compute_gradients: sequence row length mismatch");
  }
  const auto rows = all_rows(x.rows());
  Stash stash;
  const Vectord z = forward(model, x, rows, nullptr, &stash);
  return backward(model, stash, z, y, rows, nullptr);
}

}  // namespace twingrid::ml
