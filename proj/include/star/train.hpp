#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "star/corpus.hpp"
#include "star/encoder.hpp"
#include "star/supcon.hpp"

namespace star {

struct TrainConfig {
  uint32_t k = 16;
  uint32_t l = 4;
  uint64_t steps = 2000;
  uint64_t warmup = 120;
  double lr = 1e-2;
  double weight_decay = 1e-4;
  double tau_init = 0.07;
  DenominatorMode mode = DenominatorMode::negatives_only;
  uint64_t seed = 0;
  uint32_t d = 256;
  uint32_t V = 1u << 16;
  uint32_t ngram_min = 1;
  uint32_t ngram_max = 4;

  FeatureConfig feature_config() const {
    return FeatureConfig{ngram_min, ngram_max, V};
  }
  void validate() const;
};

// Strict JSON: the keys above, all optional, nothing else.
TrainConfig train_config_from_json_string(const std::string& text);
TrainConfig load_train_config(const std::string& path);
std::string train_config_to_json_string(const TrainConfig& config);

struct MetricsRow {
  uint64_t step = 0;
  double loss = 0.0;       // batch total
  double mean_loss = 0.0;  // total / b
  double lr = 0.0;
  double tau = 0.0;        // after the step's update
};

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

struct TrainResult {
  EncoderParams params;
  std::vector<MetricsRow> metrics;
  uint64_t completed_steps = 0;
  bool aborted = false;         // non-finite loss or a failed step
  std::string abort_reason;
  // params holds the last good state when aborted.
};

// sample -> encode -> loss -> grad -> AdamW, config.steps times.
// Deterministic in (corpus content hash, config): batch t draws from
// batch_rng(seed, hash, t). log_tau is excluded from weight decay and
// floored at ln(1e-4) after each update.
TrainResult train(const CorpusIndex& corpus, const TrainConfig& config);

}  // namespace star
