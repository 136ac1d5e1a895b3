#include "star/sampler.hpp"

#include "star/error.hpp"
#include "star/hash.hpp"

namespace star {

std::vector<size_t> sample_authors(Rng& rng, const CorpusIndex& corpus,
                                   size_t k) {
  if (k > corpus.authors.size()) {
    throw Error("sample_authors: k=" + std::to_string(k) + " exceeds " +
                std::to_string(corpus.authors.size()) + " authors");
  }
  std::vector<double> weights;
  weights.reserve(corpus.authors.size());
  for (const auto& author : corpus.authors) {
    weights.push_back(author.sample_weight);
  }
  return rng.weighted_sample_without_replacement(weights, k);
}

std::vector<const Chunk*> sample_views(Rng& rng, const AuthorRecord& author,
                                       size_t l, bool* used_replacement) {
  if (l < 2) {
    throw ConfigError("sample_views: l must be >= 2 so every anchor has a "
                      "positive, got " + std::to_string(l));
  }
  const size_t n = author.chunks.size();
  if (n == 0) throw Error("sample_views: author " + author.author_id +
                          " has no chunks");
  std::vector<const Chunk*> views;
  views.reserve(l);
  if (n >= l) {
    for (size_t idx : rng.sample_without_replacement(n, l)) {
      views.push_back(&author.chunks[idx]);
    }
    if (used_replacement) *used_replacement = false;
  } else {
    for (size_t i = 0; i < l; ++i) {
      views.push_back(&author.chunks[rng.below(n)]);
    }
    if (used_replacement) *used_replacement = true;
  }
  return views;
}

MultiViewBatch build_batch(Rng& rng, const CorpusIndex& corpus, uint32_t k,
                           uint32_t l) {
  if (k < 2) {
    throw ConfigError("build_batch: k must be >= 2 so cross-author negatives "
                      "exist, got " + std::to_string(k));
  }
  MultiViewBatch batch;
  batch.k = k;
  batch.l = l;
  batch.author_indices = sample_authors(rng, corpus, k);
  batch.chunks.reserve(size_t(k) * l);
  batch.labels.reserve(size_t(k) * l);
  for (uint32_t a = 0; a < k; ++a) {
    bool replaced = false;
    auto views = sample_views(rng, corpus.authors[batch.author_indices[a]], l,
                              &replaced);
    batch.with_replacement = batch.with_replacement || replaced;
    for (const Chunk* chunk : views) {
      batch.chunks.push_back(chunk);
      batch.labels.push_back(int(a));
    }
  }
  return batch;
}

Rng batch_rng(uint64_t seed, const std::string& corpus_hash, uint64_t ordinal) {
  const uint64_t folded =
      fnv1a64(corpus_hash.data(), corpus_hash.size());
  return Rng(seed ^ mix64(folded)).split(ordinal);
}

}  // namespace star
