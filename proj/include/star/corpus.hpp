#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "star/text_clean.hpp"
#include "star/tokenize.hpp"

namespace star {

struct RawDocument {
  std::string author_id;
  std::string dataset_id;
  std::string text;
};

struct Chunk {
  std::string author_id;
  int doc_index = 0;
  int chunk_index = 0;
  TokenSeq tokens;
};

// One author's cleaned, chunked document set. sample_weight carries dataset
// balancing; uniform within a dataset once balance_datasets has run.
struct AuthorRecord {
  std::string author_id;
  std::string dataset_id;
  std::vector<Chunk> chunks;
  double sample_weight = 1.0;
};

struct CorpusIndex {
  std::vector<AuthorRecord> authors;
  std::map<std::string, double> dataset_shares;

  // SHA-256 hex of the canonical JSON serialization.
  std::string content_hash() const;
};

// Greedy in-order packing of short texts up to max_len, joined by separator.
// Inputs longer than max_len are a contract violation here; the ingest
// pipeline routes those to chunk_document instead.
std::vector<TokenSeq> pack_short_texts(const std::vector<TokenSeq>& texts,
                                       size_t max_len,
                                       const TokenSeq& separator);

// Non-overlapping windows of exactly max_len tokens; a final partial window
// is kept iff its length >= min_tail. Empty input yields no chunks.
std::vector<TokenSeq> chunk_document(const TokenSeq& tokens, size_t max_len,
                                     size_t min_tail);

// Author ids that mark anonymous or multi-author texts. The convention:
// "anonymous"/"unknown"/"various" (case-insensitive) or any id containing
// ';' (joint authorship).
bool is_excluded_author_id(const std::string& author_id);

// Keeps authors with at least min_docs chunks, dropping excluded ids when
// drop_anonymous is set. Fewer than two surviving authors is fatal.
CorpusIndex filter_authors(const CorpusIndex& corpus, size_t min_docs,
                           bool drop_anonymous);

// Sets per-author sample_weight so weighted author draws hit target_shares
// in expectation: weight = share / author_count, uniform within a dataset.
// Shares are normalized to sum to one; a share for a dataset with no
// authors is an error naming the dataset.
CorpusIndex balance_datasets(const CorpusIndex& corpus,
                             const std::map<std::string, double>& target_shares);

struct IngestOptions {
  size_t max_len = 512;
  size_t min_docs = 16;
  size_t min_tail = 32;
  bool drop_anonymous = true;
  CleaningRules cleaning;
  bool clean_all = true;                  // apply cleaning to every dataset
  std::set<std::string> clean_datasets;   // used when clean_all is false
  std::set<std::string> pack_datasets;    // greedy short-text packing
  std::set<std::string> drop_edge_datasets;  // drop first/last chunk per doc
  // Target shares; empty means equal shares over datasets present.
  std::map<std::string, double> shares;
};

// Full ingest pipeline: clean -> tokenize -> pack -> chunk -> drop edges ->
// filter -> balance. Authors come out sorted by (dataset, author) so the
// corpus is canonical regardless of input order.
CorpusIndex build_corpus(const std::vector<RawDocument>& docs,
                         const IngestOptions& options);

// Corpus file: JSON wrapper {format, version, content_hash, corpus} where
// content_hash covers the canonical corpus body. load_corpus recomputes and
// verifies the hash before returning.
std::string corpus_to_string(const CorpusIndex& corpus);
CorpusIndex corpus_from_string(const std::string& data);
void save_corpus(const CorpusIndex& corpus, const std::string& path);
CorpusIndex load_corpus(const std::string& path);

}  // namespace star
