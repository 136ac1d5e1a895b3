#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "star/corpus.hpp"
#include "star/hash.hpp"
#include "star/rng.hpp"

namespace star::testsupport {

// Deterministic pseudo-word from a mixed 64-bit value; six lowercase
// letters, so distinct ids collide with negligible probability.
inline std::string code_word(uint64_t value) {
  uint64_t mixed = mix64(value);
  std::string word;
  for (int i = 0; i < 6; ++i) {
    word.push_back(static_cast<char>('a' + mixed % 26));
    mixed /= 26;
  }
  return word;
}

inline std::vector<std::string> signature_words(const std::string& prefix,
                                                size_t author_ordinal) {
  uint64_t base = fnv1a64(prefix.data(), prefix.size());
  std::vector<std::string> words;
  for (uint64_t w = 0; w < 3; ++w) {
    words.push_back(code_word(base ^ (author_ordinal * 3 + w + 1)));
  }
  return words;
}

// Corpus whose authors share a filler vocabulary and differ only through
// injected per-author signature words, so separation has to come from
// character-level features. Distinct prefixes give disjoint author ids
// and disjoint signatures, which is what a zero-shot split needs.
inline CorpusIndex signature_corpus(size_t author_count,
                                    size_t chunks_per_author,
                                    size_t tokens_per_chunk, uint64_t seed,
                                    const std::string& prefix) {
  static const std::vector<std::string> kFiller = {
      "the",  "of",    "and",  "to",    "in",    "that",  "was",  "his",
      "he",   "it",    "with", "is",    "for",   "as",    "had",  "you",
      "not",  "be",    "her",  "on",    "at",    "by",    "which", "have",
      "or",   "from",  "this", "him",   "but",   "all",   "she",  "they",
      "were", "my",    "are",  "me",    "one",   "their", "so",   "an"};
  CorpusIndex corpus;
  Rng rng(seed);
  for (size_t a = 0; a < author_count; ++a) {
    AuthorRecord record;
    record.author_id = prefix + "_author_" + std::to_string(a);
    record.dataset_id = "synthetic";
    record.sample_weight = 1.0;
    std::vector<std::string> signature = signature_words(prefix, a);
    Rng author_rng = rng.split(a);
    for (size_t c = 0; c < chunks_per_author; ++c) {
      Rng chunk_rng = author_rng.split(c);
      Chunk chunk;
      chunk.author_id = record.author_id;
      chunk.doc_index = static_cast<int>(c);
      chunk.chunk_index = 0;
      for (size_t t = 0; t < tokens_per_chunk; ++t) {
        if (chunk_rng.unit_real() < 0.45) {
          chunk.tokens.push_back(signature[chunk_rng.below(signature.size())]);
        } else {
          chunk.tokens.push_back(kFiller[chunk_rng.below(kFiller.size())]);
        }
      }
      record.chunks.push_back(std::move(chunk));
    }
    corpus.authors.push_back(std::move(record));
  }
  corpus.dataset_shares["synthetic"] = 1.0;
  return corpus;
}

}  // namespace star::testsupport
