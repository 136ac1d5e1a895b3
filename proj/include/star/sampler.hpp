#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "star/corpus.hpp"
#include "star/rng.hpp"

namespace star {

// One training batch: k distinct authors with l chunk views each, grouped
// so chunks[i*l .. i*l+l) all carry label i. Within a batch no chunk
// repeats unless a short author forced with-replacement draws, which
// with_replacement records.
struct MultiViewBatch {
  std::vector<const Chunk*> chunks;   // b = k*l entries, author-grouped
  std::vector<int> labels;            // batch-local author index per chunk
  std::vector<size_t> author_indices; // corpus author index per label
  uint32_t k = 0;
  uint32_t l = 0;
  bool with_replacement = false;

  size_t size() const { return chunks.size(); }
};

// k distinct author indices drawn by sample_weight without replacement.
std::vector<size_t> sample_authors(Rng& rng, const CorpusIndex& corpus,
                                   size_t k);

// l chunks of one author, uniform without replacement when the author has
// at least l chunks; with replacement otherwise (reported via the flag).
std::vector<const Chunk*> sample_views(Rng& rng, const AuthorRecord& author,
                                       size_t l, bool* used_replacement);

MultiViewBatch build_batch(Rng& rng, const CorpusIndex& corpus, uint32_t k,
                           uint32_t l);

// Generator for batch number `ordinal`: pure in (seed, corpus_hash,
// ordinal), so batches can be built out of order or in parallel.
Rng batch_rng(uint64_t seed, const std::string& corpus_hash, uint64_t ordinal);

}  // namespace star
