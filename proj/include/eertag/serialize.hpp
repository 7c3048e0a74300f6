#pragma once

#include <string>

#include "eertag/scorer.hpp"
#include "eertag/trainer.hpp"

namespace eertag {

// Versioned binary model container: magic, format version, JSON header
// (config, classes, vocab, tensor manifest), then raw little-endian doubles.
// Write -> read round-trips bit-exactly.
void save_model(const ScorerParams& params, const std::string& path);
ScorerParams load_model(const std::string& path);

struct OptimizerState {
  long step = 0;
  ParamGradients m1;
  ParamGradients m2;
};

void save_optimizer(const OptimizerState& state, const std::string& path);
OptimizerState load_optimizer(const std::string& path,
                              const ScorerParams& shape);

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);

}  // namespace eertag
