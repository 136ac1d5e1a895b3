#include "star/encoder.hpp"

#include <cmath>
#include <exception>

#include <json.hpp>

#include "star/binio.hpp"
#include "star/error.hpp"
#include "star/hash.hpp"
#include "star/parallel.hpp"

namespace star {

using nlohmann::json;

EncoderParams init_encoder_params(uint32_t V, uint32_t d, double tau_init,
                                  Rng& rng) {
  if (V < 1 || d < 1) throw ConfigError("init_encoder_params: V and d must be >= 1");
  if (!(tau_init > 0.0)) throw ConfigError("init_encoder_params: tau_init must be > 0");
  EncoderParams p;
  p.V = V;
  p.d = d;
  p.W.resize(size_t(V) * d);
  const double scale = 1.0 / std::sqrt(double(d));
  for (double& w : p.W) w = rng.normal() * scale;
  p.bias.assign(d, 0.0);
  p.log_tau = std::log(tau_init);
  return p;
}

std::vector<double> project(const FeatureVector& x, const EncoderParams& params) {
  if (x.buckets != params.V) {
    throw ConfigError("project: feature space " + std::to_string(x.buckets) +
                      " does not match encoder V " + std::to_string(params.V));
  }
  std::vector<double> y = params.bias;
  for (const auto& [bucket, value] : x.entries) {
    const double* row = params.W.data() + size_t(bucket) * params.d;
    for (uint32_t j = 0; j < params.d; ++j) y[j] += value * row[j];
  }
  return y;
}

std::vector<double> normalize(const std::vector<double>& y) {
  double sum_sq = 0.0;
  for (double v : y) sum_sq += v * v;
  const double norm = std::sqrt(sum_sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error("normalize: projection has norm " + std::to_string(norm) +
                "; cannot produce a unit embedding");
  }
  std::vector<double> e(y.size());
  for (size_t j = 0; j < y.size(); ++j) e[j] = y[j] / norm;
  return e;
}

std::vector<double> encode(const FeatureVector& x, const EncoderParams& params) {
  return normalize(project(x, params));
}

std::vector<double> encode_chunk(const TokenSeq& chunk,
                                 const EncoderParams& params,
                                 const FeatureConfig& config) {
  return encode(featurize(chunk, config), params);
}

EmbeddingMatrix encode_corpus(const std::vector<const Chunk*>& chunks,
                              const EncoderParams& params,
                              const FeatureConfig& config) {
  EmbeddingMatrix m;
  m.rows = chunks.size();
  m.dim = params.d;
  m.data.resize(m.rows * size_t(m.dim));
  m.meta.resize(m.rows);
  parallel_for(m.rows, [&](size_t i) {
    try {
      auto e = encode_chunk(chunks[i]->tokens, params, config);
      std::copy(e.begin(), e.end(), m.row(i));
    } catch (const std::exception& ex) {
      throw Error("encode_corpus: row " + std::to_string(i) + ": " + ex.what());
    }
    m.meta[i] = RowMeta{chunks[i]->author_id, chunks[i]->doc_index,
                        chunks[i]->chunk_index};
  });
  return m;
}

std::vector<const Chunk*> collect_chunks(const CorpusIndex& corpus) {
  std::vector<const Chunk*> out;
  for (const auto& author : corpus.authors) {
    for (const auto& chunk : author.chunks) out.push_back(&chunk);
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'T', 'A', 'R'};
constexpr uint32_t kCheckpointVersion = 1;
constexpr uint32_t kEmbeddingVersion = 1;

// Splits off and verifies the trailing SHA-256; returns the payload view.
std::string checked_payload(const std::string& blob, const std::string& what) {
  if (blob.size() < 4 + 32 || blob.compare(0, 4, kMagic, 4) != 0) {
    throw IntegrityError(what + ": missing STAR header");
  }
  const std::string payload = blob.substr(0, blob.size() - 32);
  const auto digest = sha256(payload);
  if (blob.compare(blob.size() - 32, 32,
                   reinterpret_cast<const char*>(digest.data()), 32) != 0) {
    throw IntegrityError(what + ": SHA-256 trailer mismatch");
  }
  return payload;
}

void append_digest(std::string& buffer) {
  const auto digest = sha256(buffer);
  buffer.append(reinterpret_cast<const char*>(digest.data()), digest.size());
}

}  // namespace

void save_checkpoint(const EncoderParams& params, const std::string& path) {
  std::string buffer;
  buffer.reserve(16 + 4 * (params.W.size() + params.bias.size()) + 8 + 32);
  buffer.append(kMagic, 4);
  put_u32le(buffer, kCheckpointVersion);
  put_u32le(buffer, params.d);
  put_u32le(buffer, params.V);
  for (double w : params.W) put_f32le(buffer, float(w));
  for (double b : params.bias) put_f32le(buffer, float(b));
  put_f64le(buffer, params.log_tau);
  append_digest(buffer);
  atomic_write_file(path, buffer);
}

EncoderParams load_checkpoint(const std::string& path) {
  const std::string blob = read_file(path);
  const std::string payload = checked_payload(blob, path);
  ByteReader reader(payload);
  reader.bytes(4);  // magic, already checked
  const uint32_t version = reader.u32le();
  if (version != kCheckpointVersion) {
    throw IntegrityError(path + ": unsupported checkpoint version " +
                         std::to_string(version));
  }
  EncoderParams p;
  p.d = reader.u32le();
  p.V = reader.u32le();
  const uint64_t expect = 16 + 4 * (uint64_t(p.V) * p.d + p.d) + 8;
  if (payload.size() != expect) {
    throw IntegrityError(path + ": payload size " +
                         std::to_string(payload.size()) + " does not match d=" +
                         std::to_string(p.d) + " V=" + std::to_string(p.V));
  }
  p.W.resize(size_t(p.V) * p.d);
  for (double& w : p.W) w = reader.f32le();
  p.bias.resize(p.d);
  for (double& b : p.bias) b = reader.f32le();
  p.log_tau = reader.f64le();
  return p;
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path) {
  std::string buffer;
  buffer.reserve(20 + 4 * matrix.data.size() + 32);
  buffer.append(kMagic, 4);
  put_u32le(buffer, kEmbeddingVersion);
  put_u64le(buffer, matrix.rows);
  put_u32le(buffer, matrix.dim);
  for (double v : matrix.data) put_f32le(buffer, float(v));
  append_digest(buffer);
  atomic_write_file(path, buffer);

  json rows = json::array();
  for (const auto& meta : matrix.meta) {
    rows.push_back({{"author", meta.author_id},
                    {"doc", meta.doc_index},
                    {"chunk", meta.chunk_index}});
  }
  json sidecar{{"format", "star-embeddings-meta"},
               {"version", 1},
               {"rows", std::move(rows)}};
  atomic_write_file(path + ".meta.json", sidecar.dump());
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  const std::string blob = read_file(path);
  const std::string payload = checked_payload(blob, path);
  ByteReader reader(payload);
  reader.bytes(4);
  const uint32_t version = reader.u32le();
  if (version != kEmbeddingVersion) {
    throw IntegrityError(path + ": unsupported embedding version " +
                         std::to_string(version));
  }
  EmbeddingMatrix m;
  m.rows = reader.u64le();
  m.dim = reader.u32le();
  if (payload.size() != 20 + 4 * m.rows * m.dim) {
    throw IntegrityError(path + ": payload size does not match " +
                         std::to_string(m.rows) + "x" + std::to_string(m.dim));
  }
  m.data.resize(m.rows * size_t(m.dim));
  for (double& v : m.data) v = reader.f32le();

  // f32 rounding perturbs unit rows by ~1e-7; anything larger is a foreign
  // or damaged file. Renormalize so downstream math sees exact unit norms.
  for (size_t i = 0; i < m.rows; ++i) {
    double sum_sq = 0.0;
    for (uint32_t j = 0; j < m.dim; ++j) sum_sq += m.row(i)[j] * m.row(i)[j];
    const double norm = std::sqrt(sum_sq);
    if (!(std::abs(norm - 1.0) < 1e-4)) {
      throw IntegrityError(path + ": row " + std::to_string(i) + " has norm " +
                           std::to_string(norm) + ", expected 1");
    }
    for (uint32_t j = 0; j < m.dim; ++j) m.row(i)[j] /= norm;
  }

  const std::string meta_path = path + ".meta.json";
  json sidecar;
  try {
    sidecar = json::parse(read_file(meta_path));
  } catch (const json::exception& e) {
    throw IntegrityError(meta_path + ": invalid JSON: " + e.what());
  }
  if (sidecar.value("format", "") != "star-embeddings-meta") {
    throw IntegrityError(meta_path + ": missing star-embeddings-meta header");
  }
  const auto& rows = sidecar.at("rows");
  if (rows.size() != m.rows) {
    throw IntegrityError(meta_path + ": " + std::to_string(rows.size()) +
                         " metadata rows for " + std::to_string(m.rows) +
                         " embedding rows");
  }
  m.meta.reserve(m.rows);
  for (const auto& row : rows) {
    m.meta.push_back(RowMeta{row.at("author").get<std::string>(),
                             row.at("doc").get<int>(),
                             row.at("chunk").get<int>()});
  }
  return m;
}

}  // namespace star
