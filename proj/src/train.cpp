#include "star/train.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "star/binio.hpp"
#include "star/error.hpp"
#include "star/optimizer.hpp"
#include "star/parallel.hpp"
#include "star/sampler.hpp"

namespace star {

using nlohmann::json;

namespace {

// tau is clamped here after every update; unconstrained log_tau descent
// can otherwise collapse the temperature and overflow the similarities.
constexpr double kMinTau = 1e-4;

}  // namespace

void TrainConfig::validate() const {
  if (k < 2) throw ConfigError("train config: k must be >= 2");
  if (l < 2) throw ConfigError("train config: l must be >= 2");
  if (steps > 0 && warmup >= steps) {
    throw ConfigError("train config: warmup " + std::to_string(warmup) +
                      " must be below steps " + std::to_string(steps));
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("train config: lr must be positive and finite");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("train config: weight_decay must be >= 0 and finite");
  }
  if (!(tau_init > 0.0) || !std::isfinite(tau_init)) {
    throw ConfigError("train config: tau_init must be positive and finite");
  }
  if (d < 1) throw ConfigError("train config: d must be >= 1");
  if (V < 1) throw ConfigError("train config: V must be >= 1");
  if (ngram_min < 1 || ngram_min > ngram_max) {
    throw ConfigError("train config: need 1 <= ngram_min <= ngram_max");
  }
}

TrainConfig train_config_from_json_string(const std::string& text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: invalid JSON: ") + e.what());
  }
  if (!parsed.is_object()) {
    throw ConfigError("train config: top level must be a JSON object");
  }

  TrainConfig config;
  try {
    for (const auto& [key, value] : parsed.items()) {
      if (key == "k") config.k = value.get<uint32_t>();
      else if (key == "l") config.l = value.get<uint32_t>();
      else if (key == "steps") config.steps = value.get<uint64_t>();
      else if (key == "warmup") config.warmup = value.get<uint64_t>();
      else if (key == "lr") config.lr = value.get<double>();
      else if (key == "weight_decay") config.weight_decay = value.get<double>();
      else if (key == "tau_init") config.tau_init = value.get<double>();
      else if (key == "mode")
        config.mode = denominator_mode_from_string(value.get<std::string>());
      else if (key == "seed") config.seed = value.get<uint64_t>();
      else if (key == "d") config.d = value.get<uint32_t>();
      else if (key == "V") config.V = value.get<uint32_t>();
      else if (key == "ngram_min") config.ngram_min = value.get<uint32_t>();
      else if (key == "ngram_max") config.ngram_max = value.get<uint32_t>();
      else throw ConfigError("train config: unknown key \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: bad value type: ") + e.what());
  }
  config.validate();
  return config;
}

TrainConfig load_train_config(const std::string& path) {
  try {
    return train_config_from_json_string(read_file(path));
  } catch (ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string train_config_to_json_string(const TrainConfig& config) {
  json out{{"k", config.k},
           {"l", config.l},
           {"steps", config.steps},
           {"warmup", config.warmup},
           {"lr", config.lr},
           {"weight_decay", config.weight_decay},
           {"tau_init", config.tau_init},
           {"mode", to_string(config.mode)},
           {"seed", config.seed},
           {"d", config.d},
           {"V", config.V},
           {"ngram_min", config.ngram_min},
           {"ngram_max", config.ngram_max}};
  return out.dump(2);
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "step,loss,mean_loss,lr,tau\n";
  char line[256];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%" PRIu64 ",%.17g,%.17g,%.17g,%.17g\n",
                  row.step, row.loss, row.mean_loss, row.lr, row.tau);
    out += line;
  }
  return out;
}

namespace {

bool params_finite(const EncoderParams& params) {
  for (double w : params.W) {
    if (!std::isfinite(w)) return false;
  }
  for (double b : params.bias) {
    if (!std::isfinite(b)) return false;
  }
  return std::isfinite(params.log_tau);
}

}  // namespace

TrainResult train(const CorpusIndex& corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.authors.size() < config.k) {
    throw ConfigError("train: k=" + std::to_string(config.k) +
                      " exceeds the corpus's " +
                      std::to_string(corpus.authors.size()) + " authors");
  }
  const std::string corpus_hash = corpus.content_hash();
  const FeatureConfig feature_config = config.feature_config();

  Rng init_rng(config.seed);
  TrainResult result;
  result.params =
      init_encoder_params(config.V, config.d, config.tau_init, init_rng);
  if (config.steps == 0) return result;

  // Features are pure per chunk; compute the whole cache once up front.
  const auto chunks = collect_chunks(corpus);
  std::vector<FeatureVector> cache(chunks.size());
  parallel_for(chunks.size(), [&](size_t i) {
    cache[i] = featurize(chunks[i]->tokens, feature_config);
  });
  std::unordered_map<const Chunk*, size_t> cache_index;
  cache_index.reserve(chunks.size());
  for (size_t i = 0; i < chunks.size(); ++i) cache_index[chunks[i]] = i;

  AdamWHyper decayed;
  decayed.weight_decay = config.weight_decay;
  AdamWHyper undecayed;  // the temperature is excluded from weight decay
  AdamWState w_state(result.params.W.size(), decayed);
  AdamWState bias_state(result.params.bias.size(), decayed);
  AdamWState tau_state(1, undecayed);

  EncoderParams last_good = result.params;
  for (uint64_t t = 0; t < config.steps; ++t) {
    try {
      last_good = result.params;

      Rng rng = batch_rng(config.seed, corpus_hash, t);
      auto batch = build_batch(rng, corpus, config.k, config.l);
      std::vector<FeatureVector> features;
      features.reserve(batch.size());
      for (const Chunk* chunk : batch.chunks) {
        features.push_back(cache[cache_index.at(chunk)]);
      }

      auto grads =
          supcon_grad(features, batch.labels, result.params, config.mode);
      if (!std::isfinite(grads.loss.total)) {
        throw Error("non-finite loss " + std::to_string(grads.loss.total));
      }

      const double lr = lr_at(t, config.warmup, config.steps, config.lr);
      w_state.hyper.lr = lr;
      bias_state.hyper.lr = lr;
      tau_state.hyper.lr = lr;
      adamw_step(result.params.W, grads.dW, w_state);
      adamw_step(result.params.bias, grads.dbias, bias_state);
      adamw_step(std::span<double>(&result.params.log_tau, 1),
                 std::span<const double>(&grads.dlog_tau, 1), tau_state);
      result.params.log_tau =
          std::max(result.params.log_tau, std::log(kMinTau));
      if (!params_finite(result.params)) {
        throw Error("non-finite parameters after the update");
      }

      result.metrics.push_back(MetricsRow{
          t, grads.loss.total, grads.loss.total / double(batch.size()), lr,
          result.params.tau()});
      result.completed_steps = t + 1;
    } catch (const std::exception& e) {
      result.aborted = true;
      result.abort_reason =
          "step " + std::to_string(t) + ": " + e.what();
      result.params = last_good;
      return result;
    }
  }
  return result;
}

}  // namespace star
