#include "star/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "star/error.hpp"
#include "star/hash.hpp"

namespace star {

FeatureVector featurize(const TokenSeq& chunk, const FeatureConfig& config) {
  if (config.ngram_min < 1 || config.ngram_min > config.ngram_max) {
    throw ConfigError("featurize: need 1 <= ngram_min <= ngram_max, got [" +
                      std::to_string(config.ngram_min) + ", " +
                      std::to_string(config.ngram_max) + "]");
  }
  if (config.buckets < 1) throw ConfigError("featurize: buckets must be >= 1");
  if (chunk.empty()) throw Error("featurize: empty chunk");

  const std::string text = Tokenizer::detokenize(chunk);
  std::unordered_map<uint32_t, double> counts;
  for (uint32_t n = config.ngram_min; n <= config.ngram_max; ++n) {
    if (text.size() < n) continue;
    for (size_t i = 0; i + n <= text.size(); ++i) {
      counts[uint32_t(fnv1a64(text.data() + i, n) % config.buckets)] += 1.0;
    }
  }
  if (counts.empty()) {
    throw Error("featurize: text of " + std::to_string(text.size()) +
                " bytes yields no n-grams with ngram_min " +
                std::to_string(config.ngram_min));
  }

  FeatureVector out;
  out.buckets = config.buckets;
  out.entries.reserve(counts.size());
  for (const auto& [bucket, tf] : counts) {
    out.entries.emplace_back(bucket, 1.0 + std::log(tf));
  }
  std::sort(out.entries.begin(), out.entries.end());

  double sum_sq = 0.0;
  for (const auto& [bucket, w] : out.entries) sum_sq += w * w;
  const double inv_norm = 1.0 / std::sqrt(sum_sq);
  for (auto& [bucket, w] : out.entries) w *= inv_norm;
  return out;
}

}  // namespace star
