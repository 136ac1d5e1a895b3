#include "star/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "star/error.hpp"
#include "star/hash.hpp"

namespace star {

using nlohmann::json;

std::vector<TokenSeq> pack_short_texts(const std::vector<TokenSeq>& texts,
                                       size_t max_len,
                                       const TokenSeq& separator) {
  std::vector<TokenSeq> out;
  TokenSeq current;
  for (const auto& text : texts) {
    if (text.size() > max_len) {
      throw Error("pack_short_texts: input of " + std::to_string(text.size()) +
                  " tokens exceeds max_len " + std::to_string(max_len) +
                  "; route it to chunk_document");
    }
    if (current.empty()) {
      current = text;
      continue;
    }
    if (current.size() + separator.size() + text.size() <= max_len) {
      current.insert(current.end(), separator.begin(), separator.end());
      current.insert(current.end(), text.begin(), text.end());
    } else {
      out.push_back(std::move(current));
      current = text;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<TokenSeq> chunk_document(const TokenSeq& tokens, size_t max_len,
                                     size_t min_tail) {
  if (max_len < 1) throw ConfigError("chunk_document: max_len must be >= 1");
  if (min_tail < 1) throw ConfigError("chunk_document: min_tail must be >= 1");
  std::vector<TokenSeq> out;
  size_t pos = 0;
  while (pos + max_len <= tokens.size()) {
    out.emplace_back(tokens.begin() + ptrdiff_t(pos),
                     tokens.begin() + ptrdiff_t(pos + max_len));
    pos += max_len;
  }
  const size_t tail = tokens.size() - pos;
  if (tail >= min_tail) {
    out.emplace_back(tokens.begin() + ptrdiff_t(pos), tokens.end());
  }
  return out;
}

bool is_excluded_author_id(const std::string& author_id) {
  if (author_id.find(';') != std::string::npos) return true;
  std::string lower;
  lower.reserve(author_id.size());
  for (char c : author_id) lower.push_back(char(std::tolower((unsigned char)c)));
  return lower == "anonymous" || lower == "unknown" || lower == "various";
}

CorpusIndex filter_authors(const CorpusIndex& corpus, size_t min_docs,
                           bool drop_anonymous) {
  if (min_docs < 1) throw ConfigError("filter_authors: min_docs must be >= 1");
  CorpusIndex out;
  out.dataset_shares = corpus.dataset_shares;
  for (const auto& author : corpus.authors) {
    if (drop_anonymous && is_excluded_author_id(author.author_id)) continue;
    if (author.chunks.size() < min_docs) continue;
    out.authors.push_back(author);
  }
  if (out.authors.size() < 2) {
    throw ConfigError(
        "filter_authors: fewer than 2 authors survive (min_docs=" +
        std::to_string(min_docs) + "); contrastive training is impossible");
  }
  return out;
}

CorpusIndex balance_datasets(
    const CorpusIndex& corpus,
    const std::map<std::string, double>& target_shares) {
  std::map<std::string, size_t> author_counts;
  for (const auto& author : corpus.authors) {
    ++author_counts[author.dataset_id];
    if (target_shares.find(author.dataset_id) == target_shares.end()) {
      throw ConfigError("balance_datasets: dataset \"" + author.dataset_id +
                        "\" has no target share");
    }
  }
  double share_sum = 0.0;
  for (const auto& [dataset, share] : target_shares) {
    if (!(share > 0.0)) {
      throw ConfigError("balance_datasets: share for dataset \"" + dataset +
                        "\" must be positive");
    }
    if (author_counts.find(dataset) == author_counts.end()) {
      throw ConfigError("balance_datasets: dataset \"" + dataset +
                        "\" has zero authors");
    }
    share_sum += share;
  }

  CorpusIndex out = corpus;
  out.dataset_shares.clear();
  for (const auto& [dataset, share] : target_shares) {
    out.dataset_shares[dataset] = share / share_sum;
  }
  for (auto& author : out.authors) {
    author.sample_weight = out.dataset_shares.at(author.dataset_id) /
                           double(author_counts.at(author.dataset_id));
  }
  return out;
}

namespace {

struct AuthorBuild {
  std::string dataset_id;
  std::vector<TokenSeq> texts;  // tokenized, in input order
};

std::vector<Chunk> chunks_for_author(const std::string& author_id,
                                     const AuthorBuild& build,
                                     const IngestOptions& options) {
  const bool pack = options.pack_datasets.count(build.dataset_id) > 0;
  const bool drop_edges = options.drop_edge_datasets.count(build.dataset_id) > 0;
  static const TokenSeq kSeparator = {"\n", "\n", "\n"};

  // Packing folds consecutive short texts into one document; a long text
  // flushes the run and passes through on its own.
  std::vector<TokenSeq> documents;
  if (pack) {
    std::vector<TokenSeq> run;
    auto flush = [&] {
      if (run.empty()) return;
      auto packed = pack_short_texts(run, options.max_len, kSeparator);
      documents.insert(documents.end(), packed.begin(), packed.end());
      run.clear();
    };
    for (const auto& text : build.texts) {
      if (text.size() > options.max_len) {
        flush();
        documents.push_back(text);
      } else {
        run.push_back(text);
      }
    }
    flush();
  } else {
    documents = build.texts;
  }

  std::vector<Chunk> chunks;
  int doc_index = 0;
  for (const auto& doc : documents) {
    auto windows = chunk_document(doc, options.max_len, options.min_tail);
    if (drop_edges) {
      if (!windows.empty()) windows.erase(windows.begin());
      if (!windows.empty()) windows.pop_back();
    }
    if (windows.empty()) continue;
    int chunk_index = 0;
    for (auto& w : windows) {
      chunks.push_back(Chunk{author_id, doc_index, chunk_index++, std::move(w)});
    }
    ++doc_index;
  }
  return chunks;
}

}  // namespace

CorpusIndex build_corpus(const std::vector<RawDocument>& docs,
                         const IngestOptions& options) {
  Tokenizer tokenizer({options.cleaning.url_token, options.cleaning.mention_token});

  // Keyed by (dataset, author); std::map gives the canonical author order.
  std::map<std::pair<std::string, std::string>, AuthorBuild> builds;
  for (const auto& doc : docs) {
    if (doc.author_id.empty())
      throw Error("build_corpus: empty author id");
    if (doc.dataset_id.empty())
      throw Error("build_corpus: empty dataset id");
    if (options.drop_anonymous && is_excluded_author_id(doc.author_id)) continue;

    const bool clean = options.clean_all ||
                       options.clean_datasets.count(doc.dataset_id) > 0;
    const std::string text =
        clean ? clean_text(doc.text, options.cleaning) : doc.text;
    TokenSeq tokens = tokenizer.tokenize(text);
    if (tokens.empty()) continue;  // empty after cleaning: dropped

    auto& build = builds[{doc.dataset_id, doc.author_id}];
    build.dataset_id = doc.dataset_id;
    build.texts.push_back(std::move(tokens));
  }

  CorpusIndex corpus;
  for (const auto& [key, build] : builds) {
    AuthorRecord author;
    author.author_id = key.second;
    author.dataset_id = key.first;
    author.chunks = chunks_for_author(key.second, build, options);
    if (author.chunks.empty()) continue;
    corpus.authors.push_back(std::move(author));
  }

  corpus = filter_authors(corpus, options.min_docs, options.drop_anonymous);

  std::map<std::string, double> shares = options.shares;
  if (shares.empty()) {
    std::set<std::string> datasets;
    for (const auto& author : corpus.authors) datasets.insert(author.dataset_id);
    for (const auto& dataset : datasets) shares[dataset] = 1.0;
  }
  return balance_datasets(corpus, shares);
}

namespace {

json corpus_body(const CorpusIndex& corpus) {
  json authors = json::array();
  for (const auto& author : corpus.authors) {
    // Chunks are stored nested by document; indices are positional.
    json docs = json::array();
    int last_doc = -1;
    for (const auto& chunk : author.chunks) {
      if (chunk.doc_index != last_doc) {
        docs.push_back(json::array());
        last_doc = chunk.doc_index;
      }
      docs.back().push_back(chunk.tokens);
    }
    authors.push_back({{"author", author.author_id},
                       {"dataset", author.dataset_id},
                       {"weight", author.sample_weight},
                       {"docs", std::move(docs)}});
  }
  return json{{"authors", std::move(authors)},
              {"dataset_shares", corpus.dataset_shares}};
}

CorpusIndex corpus_from_body(const json& body) {
  CorpusIndex corpus;
  for (const auto& [dataset, share] : body.at("dataset_shares").items()) {
    corpus.dataset_shares[dataset] = share.get<double>();
  }
  for (const auto& entry : body.at("authors")) {
    AuthorRecord author;
    author.author_id = entry.at("author").get<std::string>();
    author.dataset_id = entry.at("dataset").get<std::string>();
    author.sample_weight = entry.at("weight").get<double>();
    int doc_index = 0;
    for (const auto& doc : entry.at("docs")) {
      int chunk_index = 0;
      for (const auto& chunk : doc) {
        author.chunks.push_back(Chunk{author.author_id, doc_index, chunk_index++,
                                      chunk.get<TokenSeq>()});
      }
      ++doc_index;
    }
    corpus.authors.push_back(std::move(author));
  }
  return corpus;
}

}  // namespace

std::string CorpusIndex::content_hash() const {
  return to_hex(sha256(corpus_body(*this).dump()));
}

std::string corpus_to_string(const CorpusIndex& corpus) {
  json body = corpus_body(corpus);
  json file{{"format", "star-corpus"},
            {"version", 1},
            {"content_hash", to_hex(sha256(body.dump()))},
            {"corpus", std::move(body)}};
  return file.dump();
}

CorpusIndex corpus_from_string(const std::string& data) {
  json file;
  try {
    file = json::parse(data);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("corpus file: invalid JSON: ") + e.what());
  }
  if (!file.is_object() || file.value("format", "") != "star-corpus") {
    throw IntegrityError("corpus file: missing star-corpus header");
  }
  const auto& body = file.at("corpus");
  const std::string stored = file.at("content_hash").get<std::string>();
  const std::string actual = to_hex(sha256(body.dump()));
  if (stored != actual) {
    throw IntegrityError("corpus file: content hash mismatch (stored " +
                         stored + ", actual " + actual + ")");
  }
  return corpus_from_body(body);
}

void save_corpus(const CorpusIndex& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("save_corpus: cannot open " + path);
  out << corpus_to_string(corpus);
  if (!out) throw Error("save_corpus: write failed for " + path);
}

CorpusIndex load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_corpus: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return corpus_from_string(buffer.str());
  } catch (IntegrityError& e) {
    throw IntegrityError(path + ": " + e.what());
  }
}

}  // namespace star
