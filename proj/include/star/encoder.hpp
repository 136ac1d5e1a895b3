#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "star/corpus.hpp"
#include "star/featurize.hpp"
#include "star/rng.hpp"

namespace star {

// Trainable encoder state: a V×d projection applied to hashed n-gram
// features, plus the contrastive temperature stored as log tau so it stays
// positive under unconstrained updates.
struct EncoderParams {
  uint32_t V = 0;
  uint32_t d = 0;
  std::vector<double> W;     // V*d, row-major, row = feature bucket
  std::vector<double> bias;  // d
  double log_tau = 0.0;

  double tau() const { return std::exp(log_tau); }
};

// W ~ N(0, 1/sqrt(d)), bias = 0, log_tau = ln(tau_init).
EncoderParams init_encoder_params(uint32_t V, uint32_t d, double tau_init,
                                  Rng& rng);

// y = Wᵀx + bias for a sparse unit feature vector x.
std::vector<double> project(const FeatureVector& x, const EncoderParams& params);

// e = y / ‖y‖. A zero or non-finite y is an error, never a silent NaN.
std::vector<double> normalize(const std::vector<double>& y);

std::vector<double> encode(const FeatureVector& x, const EncoderParams& params);
std::vector<double> encode_chunk(const TokenSeq& chunk,
                                 const EncoderParams& params,
                                 const FeatureConfig& config);

struct RowMeta {
  std::string author_id;
  int doc_index = 0;
  int chunk_index = 0;
};

struct EmbeddingMatrix {
  size_t rows = 0;
  uint32_t dim = 0;
  std::vector<double> data;  // rows*dim, row-major
  std::vector<RowMeta> meta;

  const double* row(size_t i) const { return data.data() + i * dim; }
  double* row(size_t i) { return data.data() + i * dim; }
};

// Row i = encode(chunks[i]); order preserved; parallel over chunks.
// A singular row is reported with its index.
EmbeddingMatrix encode_corpus(const std::vector<const Chunk*>& chunks,
                              const EncoderParams& params,
                              const FeatureConfig& config);

// Flat chunk pointers over all authors, corpus order.
std::vector<const Chunk*> collect_chunks(const CorpusIndex& corpus);

// Checkpoint: "STAR", version u32, d u32, V u32, W then bias as row-major
// little-endian f32, log_tau f64, SHA-256 of everything before it.
void save_checkpoint(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

// Embedding artifact: "STAR", version u32, rows u64, dim u32, row-major
// little-endian f32, SHA-256 trailer. Row metadata goes to a JSON sidecar
// at path + ".meta.json". Rows are renormalized in double precision on
// load, after an integrity check that f32 rounding is the only deviation.
void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path);
EmbeddingMatrix load_embeddings(const std::string& path);

}  // namespace star
