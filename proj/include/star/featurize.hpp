#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "star/tokenize.hpp"

namespace star {

struct FeatureConfig {
  uint32_t ngram_min = 1;
  uint32_t ngram_max = 4;
  uint32_t buckets = 1u << 16;  // hashed feature space size V
};

// Sparse L2-normalized feature vector. Indices are strictly increasing and
// unique; values are positive.
struct FeatureVector {
  uint32_t buckets = 0;
  std::vector<std::pair<uint32_t, double>> entries;
};

// Hashed character n-gram features over the detokenized chunk text.
// Bucket = FNV-1a 64-bit of the n-gram bytes, mod V; per-bucket counts
// weighted 1 + ln(tf), then L2-normalized. Pure and platform-stable.
FeatureVector featurize(const TokenSeq& chunk, const FeatureConfig& config);

}  // namespace star
