// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "twingrid/ml/lstm.hpp"
#include "twingrid/ml/random_forest.hpp"
#include "twingrid/ml/scaler.hpp"

namespace twingrid::ml {

/// Self-describing trained-model artifact: the model plus everything needed
/// to reproduce its inputs (scaler, feature names, seeds, hyperparameters).
struct ModelArtifact {
  std::string kind;  // "random_forest" or "lstm"
  std::vector<std::string> feature_names;
  ScalerParams scaler;  // zero-length vectors when no scaler was fitted
  RandomForestModel rf;
  LstmModel lstm;
};

ModelArtifact make_rf_artifact(RandomForestModel model, ScalerParams scaler);
ModelArtifact make_lstm_artifact(LstmModel model, ScalerParams scaler,
                                 std::vector<std::string> feature_names);

/// Writes/reads a JSON artifact. Round-trips are lossless: every weight,
/// threshold, and scaler value parses back to the identical double.
void save_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

/// In-memory equivalents, exposed for tests and for report embedding.
std::string artifact_to_string(const ModelArtifact& artifact);
ModelArtifact artifact_from_string(const std::string& text);

}  // namespace twingrid::ml
