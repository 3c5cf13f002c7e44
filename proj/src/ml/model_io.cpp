// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/model_io.hpp"

#include <fstream>
#include <utility>

#include "json.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/version.hpp"

namespace twingrid::ml {

namespace {

using nlohmann::json;

json vector_to_json(const Vectord& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vectord vector_from_json(const json& j) {
  Vectord v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) v[i++] = item.get<double>();
  return v;
}

json matrix_to_json(const Matrixd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrixd matrix_from_json(const json& j) {
  const auto n_rows = static_cast<Eigen::Index>(j.size());
  if (n_rows == 0) return Matrixd(0, 0);
  const auto n_cols = static_cast<Eigen::Index>(j.front().size());
  Matrixd m(n_rows, n_cols);
  Eigen::Index i = 0;
  for (const auto& row : j) {
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw ValidationError("model artifact: ragged matrix rows");
    }
    Eigen::Index c = 0;
    for (const auto& item : row) m(i, c++) = item.get<double>();
    ++i;
  }
  return m;
}

json rf_to_json(const RandomForestModel& model) {
  json hyper = {{"n_estimators", model.hyper.n_estimators},
                {"max_depth", model.hyper.max_depth},
                {"min_samples_split", model.hyper.min_samples_split},
                {"min_samples_leaf", model.hyper.min_samples_leaf},
                {"features_per_split", model.hyper.features_per_split}};
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      nodes.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"p1", node.p1}});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"hyper", std::move(hyper)},
          {"seed", model.seed},
          {"n_features", model.n_features},
          {"trees", std::move(trees)},
          {"importances", vector_to_json(model.importances)},
          {"feature_names", model.feature_names}};
}

RandomForestModel rf_from_json(const json& j) {
  RandomForestModel model;
  const json& hyper = j.at("hyper");
  model.hyper.n_estimators = hyper.at("n_estimators").get<int>();
  model.hyper.max_depth = hyper.at("max_depth").get<int>();
  model.hyper.min_samples_split = hyper.at("min_samples_split").get<int>();
  model.hyper.min_samples_leaf = hyper.at("min_samples_leaf").get<int>();
  model.hyper.features_per_split = hyper.at("features_per_split").get<int>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.n_features = j.at("n_features").get<int>();
  for (const auto& tree_json : j.at("trees")) {
    DecisionTree tree;
    for (const auto& node_json : tree_json) {
      TreeNode node;
      node.feature = node_json.at("feature").get<int>();
      node.threshold = node_json.at("threshold").get<double>();
      node.left = node_json.at("left").get<int>();
      node.right = node_json.at("right").get<int>();
      node.p1 = node_json.at("p1").get<double>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  model.importances = vector_from_json(j.at("importances"));
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  return model;
}

json lstm_to_json(const LstmModel& model) {
  json config = {{"hidden", model.config.hidden},
                 {"window", model.config.window},
                 {"learning_rate", model.config.learning_rate},
                 {"epochs", model.config.epochs},
                 {"batch", model.config.batch},
                 {"dropout", model.config.dropout},
                 {"weight_decay", model.config.weight_decay},
                 {"patience", model.config.patience},
                 {"val_frac", model.config.val_frac}};
  return {{"config", std::move(config)},
          {"seed", model.seed},
          {"input_dim", model.input_dim},
          {"w_x", matrix_to_json(model.w_x)},
          {"w_h", matrix_to_json(model.w_h)},
          {"b", vector_to_json(model.b)},
          {"w_out", vector_to_json(model.w_out)},
          {"b_out", model.b_out},
          {"epochs_run", model.epochs_run},
          {"best_val_loss", model.best_val_loss}};
}

LstmModel lstm_from_json(const json& j) {
  LstmModel model;
  const json& config = j.at("config");
  model.config.hidden = config.at("hidden").get<int>();
  model.config.window = config.at("window").get<int>();
  model.config.learning_rate = config.at("learning_rate").get<double>();
  model.config.epochs = config.at("epochs").get<int>();
  model.config.batch = config.at("batch").get<int>();
  model.config.dropout = config.at("dropout").get<double>();
  model.config.weight_decay = config.at("weight_decay").get<double>();
  model.config.patience = config.at("patience").get<int>();
  model.config.val_frac = config.at("val_frac").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.input_dim = j.at("input_dim").get<int>();
  model.w_x = matrix_from_json(j.at("w_x"));
  model.w_h = matrix_from_json(j.at("w_h"));
  model.b = vector_from_json(j.at("b"));
  model.w_out = vector_from_json(j.at("w_out"));
  model.b_out = j.at("b_out").get<double>();
  model.epochs_run = j.at("epochs_run").get<int>();
  model.best_val_loss = j.at("best_val_loss").get<double>();
  return model;
}

json scaler_to_json(const ScalerParams& scaler) {
  return {{"mu", vector_to_json(scaler.mu)}, {"sigma", vector_to_json(scaler.sigma)}};
}

ScalerParams scaler_from_json(const json& j) {
  return {vector_from_json(j.at("mu")), vector_from_json(j.at("sigma"))};
}

}  // namespace

ModelArtifact make_rf_artifact(RandomForestModel model, ScalerParams scaler) {
  ModelArtifact artifact;
  artifact.kind = "random_forest";
  artifact.feature_names = model.feature_names;
  artifact.scaler = std::move(scaler);
  artifact.rf = std::move(model);
  return artifact;
}

ModelArtifact make_lstm_artifact(LstmModel model, ScalerParams scaler,
                                 std::vector<std::string> feature_names) {
  ModelArtifact artifact;
  artifact.kind = "lstm";
  artifact.feature_names = std::move(feature_names);
  artifact.scaler = std::move(scaler);
  artifact.lstm = std::move(model);
  return artifact;
}

std::string artifact_to_string(const ModelArtifact& artifact) {
  json j = {{"format", "twingrid-model"},
            {"tool_version", kVersion},
            {"kind", artifact.kind},
            {"feature_names", artifact.feature_names},
            {"scaler", scaler_to_json(artifact.scaler)}};
  if (artifact.kind == "random_forest") {
    j["random_forest"] = rf_to_json(artifact.rf);
  } else if (artifact.kind == "lstm") {
    j["lstm"] = lstm_to_json(artifact.lstm);
  } else {
    throw ValidationError("model artifact: unknown kind '" + artifact.kind + "'");
  }
  return j.dump(2) + "\n";
}

ModelArtifact artifact_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model artifact: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "twingrid-model") {
      throw ValidationError("model artifact: unrecognized format tag");
    }
    ModelArtifact artifact;
    artifact.kind = j.at("kind").get<std::string>();
    artifact.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    artifact.scaler = scaler_from_json(j.at("scaler"));
    if (artifact.kind == "random_forest") {
      artifact.rf = rf_from_json(j.at("random_forest"));
    } else if (artifact.kind == "lstm") {
      artifact.lstm = lstm_from_json(j.at("lstm"));
    } else {
      throw ValidationError("model artifact: unknown kind '" + artifact.kind + "'");
    }
    return artifact;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model artifact: missing or mistyped field: ") +
                          e.what());
  }
}

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
  const std::string text = artifact_to_string(artifact);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path);
}

ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return artifact_from_string(text);
}

}  // namespace twingrid::ml
