#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "star/binio.hpp"
#include "star/corpus.hpp"
#include "star/encoder.hpp"
#include "star/error.hpp"
#include "star/eval.hpp"
#include "star/hash.hpp"
#include "star/manifest.hpp"
#include "star/rng.hpp"
#include "star/text_clean.hpp"
#include "star/tokenize.hpp"
#include "star/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g17(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

// One line of input JSONL: {"author": ..., "dataset": ..., "text": ...}.
// dataset is optional. Errors carry the 1-based line number.
std::vector<star::RawDocument> read_jsonl_docs(const std::string& path) {
  std::string data = star::read_file(path);
  std::vector<star::RawDocument> docs;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= data.size()) {
    size_t end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::string where = path + ": line " + std::to_string(line_no);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw star::Error(where + ": invalid JSON: " + e.what());
    }
    if (!row.is_object()) throw star::Error(where + ": not a JSON object");
    for (const char* field : {"author", "text"}) {
      if (!row.contains(field)) {
        throw star::Error(where + ": missing field " + field);
      }
      if (!row[field].is_string()) {
        throw star::Error(where + ": field " + field + " must be a string");
      }
    }
    star::RawDocument doc;
    doc.author_id = row["author"].get<std::string>();
    doc.text = row["text"].get<std::string>();
    if (row.contains("dataset")) {
      if (!row["dataset"].is_string()) {
        throw star::Error(where + ": field dataset must be a string");
      }
      doc.dataset_id = row["dataset"].get<std::string>();
    } else {
      doc.dataset_id = "default";
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

star::TokenSeq tokens_of_text(const std::string& text) {
  static const star::CleaningRules rules;
  static const star::Tokenizer tokenizer;
  return tokenizer.tokenize(star::clean_text(text, rules));
}

// Training manifests snapshot the n-gram settings; without one the
// featurizer defaults apply. Bucket count always comes from the checkpoint.
star::FeatureConfig feature_config_for_checkpoint(
    const star::EncoderParams& params, const std::string& checkpoint_path) {
  star::FeatureConfig config;
  config.buckets = params.V;
  std::string manifest_path = star::manifest_path_for(checkpoint_path);
  if (fs::exists(manifest_path)) {
    star::RunManifest manifest = star::load_manifest(manifest_path);
    if (manifest.config.contains("ngram_min")) {
      config.ngram_min = manifest.config["ngram_min"].get<uint32_t>();
    }
    if (manifest.config.contains("ngram_max")) {
      config.ngram_max = manifest.config["ngram_max"].get<uint32_t>();
    }
  }
  return config;
}

star::EncoderParams load_verified_checkpoint(const std::string& path) {
  star::verify_artifact_against_manifest(path, "checkpoint");
  return star::load_checkpoint(path);
}

star::CorpusIndex load_verified_corpus(const std::string& path) {
  star::verify_artifact_against_manifest(path, "corpus");
  return star::load_corpus(path);
}

void write_report(const json& body, const std::string& out) {
  star::atomic_write_file(out, body.dump(2) + "\n");
}

void write_manifest_for(const std::string& command, uint64_t seed,
                        const json& config,
                        const std::map<std::string, std::string>& input_paths,
                        const std::map<std::string, std::string>& output_paths,
                        const std::string& primary_output) {
  star::RunManifest manifest;
  manifest.command = command;
  manifest.seed = seed;
  manifest.created_at = star::manifest_timestamp();
  manifest.config = config;
  for (const auto& [label, path] : input_paths) {
    manifest.inputs[label] = star::sha256_file_hex(path);
  }
  for (const auto& [label, path] : output_paths) {
    manifest.outputs[label] = star::sha256_file_hex(path);
  }
  star::save_manifest(manifest, star::manifest_path_for(primary_output));
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input;
  std::string out;
  uint64_t seed = 0;
  size_t max_len = 512;
  size_t min_docs = 16;
  size_t min_tail = 32;
  bool keep_anonymous = false;
  bool no_clean = false;
  std::vector<std::string> clean_datasets;
  std::vector<std::string> pack_datasets;
  std::vector<std::string> drop_edge_datasets;
  std::vector<std::string> shares;
};

void run_ingest(const IngestArgs& args) {
  star::IngestOptions options;
  options.max_len = args.max_len;
  options.min_docs = args.min_docs;
  options.min_tail = args.min_tail;
  options.drop_anonymous = !args.keep_anonymous;
  if (args.no_clean) {
    options.clean_all = false;
  } else if (!args.clean_datasets.empty()) {
    options.clean_all = false;
    options.clean_datasets.insert(args.clean_datasets.begin(),
                                  args.clean_datasets.end());
  }
  options.pack_datasets.insert(args.pack_datasets.begin(),
                               args.pack_datasets.end());
  options.drop_edge_datasets.insert(args.drop_edge_datasets.begin(),
                                    args.drop_edge_datasets.end());
  for (const std::string& share : args.shares) {
    size_t eq = share.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == share.size()) {
      throw star::ConfigError("--share expects dataset=weight, got: " + share);
    }
    try {
      options.shares[share.substr(0, eq)] = std::stod(share.substr(eq + 1));
    } catch (const std::exception&) {
      throw star::ConfigError("--share weight is not a number: " + share);
    }
  }

  std::vector<star::RawDocument> docs = read_jsonl_docs(args.input);
  star::CorpusIndex corpus = star::build_corpus(docs, options);
  star::save_corpus(corpus, args.out);

  json config{{"max_len", args.max_len},
              {"min_docs", args.min_docs},
              {"min_tail", args.min_tail},
              {"drop_anonymous", options.drop_anonymous},
              {"clean_all", options.clean_all},
              {"clean_datasets", args.clean_datasets},
              {"pack_datasets", args.pack_datasets},
              {"drop_edge_datasets", args.drop_edge_datasets},
              {"shares", args.shares},
              {"corpus_content_hash", corpus.content_hash()}};
  write_manifest_for("ingest", args.seed, config, {{"jsonl", args.input}},
                     {{"corpus", args.out}}, args.out);
  std::printf("ingest: %zu authors -> %s\n", corpus.authors.size(),
              args.out.c_str());
}

// ----------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus;
  std::string config_path;
  std::string out;
  std::string metrics;
  uint64_t seed = 0;
  bool seed_set = false;
};

void run_train(const TrainArgs& args) {
  star::CorpusIndex corpus = load_verified_corpus(args.corpus);
  star::TrainConfig config;
  if (!args.config_path.empty()) {
    config = star::load_train_config(args.config_path);
  }
  if (args.seed_set) config.seed = args.seed;

  star::TrainResult result = star::train(corpus, config);
  std::string metrics_path =
      args.metrics.empty() ? args.out + ".metrics.csv" : args.metrics;
  star::save_checkpoint(result.params, args.out);
  star::atomic_write_file(metrics_path, star::metrics_to_csv(result.metrics));

  json config_snapshot = json::parse(star::train_config_to_json_string(config));
  config_snapshot["corpus_content_hash"] = corpus.content_hash();
  std::map<std::string, std::string> inputs{{"corpus", args.corpus}};
  if (!args.config_path.empty()) inputs["config"] = args.config_path;
  write_manifest_for("train", config.seed, config_snapshot, inputs,
                     {{"checkpoint", args.out}, {"metrics", metrics_path}},
                     args.out);

  if (result.aborted) {
    throw star::Error("training aborted at " + args.out + " (" +
                      result.abort_reason + "); last good checkpoint written");
  }
  std::printf("train: %llu steps -> %s\n",
              (unsigned long long)result.completed_steps, args.out.c_str());
}

// ----------------------------------------------------------------- embed

struct EmbedArgs {
  std::string checkpoint;
  std::string corpus;
  std::string texts;
  std::string out;
};

void run_embed(const EmbedArgs& args) {
  star::EncoderParams params = load_verified_checkpoint(args.checkpoint);
  star::FeatureConfig config =
      feature_config_for_checkpoint(params, args.checkpoint);

  star::EmbeddingMatrix matrix;
  std::map<std::string, std::string> inputs{{"checkpoint", args.checkpoint}};
  std::string source;
  if (!args.corpus.empty()) {
    source = "corpus";
    inputs["corpus"] = args.corpus;
    star::CorpusIndex corpus = load_verified_corpus(args.corpus);
    matrix = star::encode_corpus(star::collect_chunks(corpus), params, config);
  } else {
    source = "texts";
    inputs["texts"] = args.texts;
    std::vector<star::Chunk> chunks;
    std::string data = star::read_file(args.texts);
    size_t line_no = 0;
    size_t start = 0;
    while (start <= data.size()) {
      size_t end = data.find('\n', start);
      if (end == std::string::npos) end = data.size();
      std::string line = data.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::string where = args.texts + ": line " + std::to_string(line_no);
      json row;
      try {
        row = json::parse(line);
      } catch (const json::exception& e) {
        throw star::Error(where + ": invalid JSON: " + e.what());
      }
      if (!row.is_object() || !row.contains("text") ||
          !row["text"].is_string()) {
        throw star::Error(where + ": missing field text");
      }
      star::Chunk chunk;
      chunk.author_id =
          row.contains("author") && row["author"].is_string()
              ? row["author"].get<std::string>()
              : "";
      chunk.doc_index = int(chunks.size());
      chunk.chunk_index = 0;
      chunk.tokens = tokens_of_text(row["text"].get<std::string>());
      if (chunk.tokens.empty()) {
        throw star::Error(where + ": text tokenizes to nothing");
      }
      chunks.push_back(std::move(chunk));
    }
    std::vector<const star::Chunk*> pointers;
    pointers.reserve(chunks.size());
    for (const auto& chunk : chunks) pointers.push_back(&chunk);
    matrix = star::encode_corpus(pointers, params, config);
  }

  star::save_embeddings(matrix, args.out);
  json config_snapshot{{"source", source},
                       {"ngram_min", config.ngram_min},
                       {"ngram_max", config.ngram_max},
                       {"buckets", config.buckets},
                       {"dim", params.d}};
  write_manifest_for(
      "embed", 0, config_snapshot, inputs,
      {{"embeddings", args.out}, {"sidecar", args.out + ".meta.json"}},
      args.out);
  std::printf("embed: %zu rows -> %s\n", matrix.rows, args.out.c_str());
}

// ------------------------------------------------------------ eval attrib

struct AttribArgs {
  std::string checkpoint;
  std::string dir;
  std::string strategy = "prototype";
  std::string out;
  std::string csv;
};

std::vector<fs::path> sorted_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void run_eval_attrib(const AttribArgs& args) {
  star::EncoderParams params = load_verified_checkpoint(args.checkpoint);
  star::FeatureConfig config =
      feature_config_for_checkpoint(params, args.checkpoint);
  star::AttributionStrategy strategy =
      star::attribution_strategy_from_string(args.strategy);

  fs::path root(args.dir);
  if (!fs::is_directory(root / "known") || !fs::is_directory(root / "unknown")) {
    throw star::Error(args.dir + ": expected known/ and unknown/ directories");
  }

  star::AttributionProblem problem;
  std::vector<fs::path> author_dirs;
  for (const auto& entry : fs::directory_iterator(root / "known")) {
    if (entry.is_directory()) author_dirs.push_back(entry.path());
  }
  std::sort(author_dirs.begin(), author_dirs.end());
  for (const fs::path& author_dir : author_dirs) {
    std::string author = author_dir.filename().string();
    for (const fs::path& file : sorted_files(author_dir)) {
      star::TokenSeq tokens = tokens_of_text(star::read_file(file.string()));
      if (tokens.empty()) {
        throw star::Error(file.string() + ": document tokenizes to nothing");
      }
      problem.known[author].push_back(std::move(tokens));
    }
    if (!problem.known.count(author)) {
      throw star::Error(author_dir.string() + ": author has no documents");
    }
  }

  std::vector<std::string> unknown_names;
  for (const fs::path& file : sorted_files(root / "unknown")) {
    star::TokenSeq tokens = tokens_of_text(star::read_file(file.string()));
    if (tokens.empty()) {
      throw star::Error(file.string() + ": document tokenizes to nothing");
    }
    problem.unknown.push_back(std::move(tokens));
    unknown_names.push_back(file.filename().string());
  }

  std::map<std::string, std::string> gold_map;
  bool has_gold = fs::exists(root / "gold.json");
  if (has_gold) {
    std::string gold_path = (root / "gold.json").string();
    try {
      gold_map = json::parse(star::read_file(gold_path))
                     .get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
      throw star::Error(gold_path + ": malformed gold map: " + e.what());
    }
    for (const auto& [doc, author] : gold_map) {
      if (std::find(unknown_names.begin(), unknown_names.end(), doc) ==
          unknown_names.end()) {
        throw star::Error(gold_path + ": no unknown document named " + doc);
      }
    }
  }
  for (const std::string& name : unknown_names) {
    auto it = gold_map.find(name);
    problem.gold.push_back(it == gold_map.end()
                               ? std::optional<std::string>{}
                               : std::optional<std::string>{it->second});
  }

  std::vector<std::string> predictions =
      star::attribute(problem, params, config, strategy);

  json report{{"format", "star-attrib-report"},
              {"version", 1},
              {"strategy", args.strategy}};
  json rows = json::array();
  for (size_t i = 0; i < predictions.size(); ++i) {
    json row{{"doc", unknown_names[i]}, {"author", predictions[i]}};
    if (problem.gold[i]) row["gold"] = *problem.gold[i];
    rows.push_back(row);
  }
  report["predictions"] = rows;

  if (has_gold) {
    std::vector<std::string> scored_pred, scored_gold;
    for (size_t i = 0; i < predictions.size(); ++i) {
      if (!problem.gold[i]) continue;
      scored_pred.push_back(predictions[i]);
      scored_gold.push_back(*problem.gold[i]);
    }
    star::AttributionScore score =
        star::score_attribution(scored_pred, scored_gold);
    report["accuracy"] = score.accuracy;
    report["macro_f1"] = score.macro_f1;
  }
  write_report(report, args.out);

  std::map<std::string, std::string> outputs{{"report", args.out}};
  if (!args.csv.empty()) {
    std::string csv = "doc,predicted,gold\n";
    for (size_t i = 0; i < predictions.size(); ++i) {
      csv += unknown_names[i] + "," + predictions[i] + "," +
             (problem.gold[i] ? *problem.gold[i] : "") + "\n";
    }
    star::atomic_write_file(args.csv, csv);
    outputs["csv"] = args.csv;
  }
  write_manifest_for("eval attrib", 0,
                     json{{"strategy", args.strategy}, {"dir", args.dir}},
                     {{"checkpoint", args.checkpoint}}, outputs, args.out);
  std::printf("eval attrib: %zu unknown docs -> %s\n", predictions.size(),
              args.out.c_str());
}

// ------------------------------------------------------------ eval verify

struct VerifyArgs {
  std::string checkpoint;
  std::string corpus;
  size_t pairs = 200;
  size_t epochs = 200;
  double lr = 1.0;
  uint64_t seed = 0;
  std::string out;
  std::string csv;
};

json report_of(const star::VerificationReport& r) {
  return json{{"accuracy", r.accuracy},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1}};
}

void run_eval_verify(const VerifyArgs& args) {
  star::EncoderParams params = load_verified_checkpoint(args.checkpoint);
  star::FeatureConfig config =
      feature_config_for_checkpoint(params, args.checkpoint);
  star::CorpusIndex corpus = load_verified_corpus(args.corpus);

  std::vector<const star::Chunk*> chunks = star::collect_chunks(corpus);
  star::EmbeddingMatrix all = star::encode_corpus(chunks, params, config);
  std::vector<std::vector<const double*>> author_rows(corpus.authors.size());
  size_t row = 0;
  for (size_t a = 0; a < corpus.authors.size(); ++a) {
    for (size_t c = 0; c < corpus.authors[a].chunks.size(); ++c) {
      author_rows[a].push_back(all.row(row++));
    }
  }

  std::vector<size_t> pair_capable;
  for (size_t a = 0; a < author_rows.size(); ++a) {
    if (author_rows[a].size() >= 2) pair_capable.push_back(a);
  }
  if (pair_capable.empty() || author_rows.size() < 2) {
    throw star::Error(args.corpus +
                      ": verification needs an author with two chunks and "
                      "two distinct authors");
  }

  star::Rng rng(args.seed);
  auto row_vec = [&](const double* ptr) {
    return std::vector<double>(ptr, ptr + params.d);
  };
  auto same_pair = [&](star::Rng& r) {
    size_t author = pair_capable[r.below(pair_capable.size())];
    std::vector<size_t> pick =
        r.sample_without_replacement(author_rows[author].size(), 2);
    return star::VerifierPair{row_vec(author_rows[author][pick[0]]),
                              row_vec(author_rows[author][pick[1]]), true};
  };
  auto diff_pair = [&](star::Rng& r) {
    std::vector<size_t> authors =
        r.sample_without_replacement(author_rows.size(), 2);
    const auto& rows_a = author_rows[authors[0]];
    const auto& rows_b = author_rows[authors[1]];
    return star::VerifierPair{row_vec(rows_a[r.below(rows_a.size())]),
                              row_vec(rows_b[r.below(rows_b.size())]), false};
  };

  std::vector<star::VerifierPair> train_pairs, holdout_pairs;
  star::Rng train_rng = rng.split(1);
  star::Rng holdout_rng = rng.split(2);
  for (size_t i = 0; i < args.pairs; ++i) {
    train_pairs.push_back(same_pair(train_rng));
    train_pairs.push_back(diff_pair(train_rng));
    holdout_pairs.push_back(same_pair(holdout_rng));
    holdout_pairs.push_back(diff_pair(holdout_rng));
  }

  star::VerifierHead head =
      star::train_verifier(train_pairs, args.epochs, args.lr);
  star::VerificationReport train_report =
      star::evaluate_verifier(head, train_pairs);
  star::VerificationReport holdout_report =
      star::evaluate_verifier(head, holdout_pairs);

  json report{{"format", "star-verify-report"},
              {"version", 1},
              {"pairs_per_class", args.pairs},
              {"epochs", args.epochs},
              {"lr", args.lr},
              {"seed", args.seed},
              {"train", report_of(train_report)},
              {"holdout", report_of(holdout_report)}};
  write_report(report, args.out);

  std::map<std::string, std::string> outputs{{"report", args.out}};
  if (!args.csv.empty()) {
    std::string csv = "split,accuracy,precision,recall,f1\n";
    for (const auto& [name, r] :
         {std::pair<std::string, star::VerificationReport>{"train",
                                                           train_report},
          {"holdout", holdout_report}}) {
      csv += name + "," + fmt_g17(r.accuracy) + "," + fmt_g17(r.precision) +
             "," + fmt_g17(r.recall) + "," + fmt_g17(r.f1) + "\n";
    }
    star::atomic_write_file(args.csv, csv);
    outputs["csv"] = args.csv;
  }
  write_manifest_for("eval verify", args.seed,
                     json{{"pairs_per_class", args.pairs},
                          {"epochs", args.epochs},
                          {"lr", args.lr}},
                     {{"checkpoint", args.checkpoint}, {"corpus", args.corpus}},
                     outputs, args.out);
  std::printf("eval verify: holdout F1 %.4f -> %s\n", holdout_report.f1,
              args.out.c_str());
}

// ----------------------------------------------------------- eval cluster

struct ClusterArgs {
  std::string embeddings;
  double threshold = 0.3;
  std::string out;
  std::string csv;
};

void run_eval_cluster(const ClusterArgs& args) {
  star::verify_artifact_against_manifest(args.embeddings, "embeddings");
  star::EmbeddingMatrix matrix = star::load_embeddings(args.embeddings);
  star::Partition partition = star::cluster(matrix, args.threshold);

  json report{{"format", "star-cluster-report"},
              {"version", 1},
              {"threshold", args.threshold},
              {"clusters", partition.clusters}};
  json rows = json::array();
  for (size_t i = 0; i < matrix.rows; ++i) {
    rows.push_back(json{{"row", i},
                        {"author", matrix.meta[i].author_id},
                        {"doc", matrix.meta[i].doc_index},
                        {"chunk", matrix.meta[i].chunk_index},
                        {"cluster", partition.assignment[i]}});
  }
  report["assignment"] = rows;

  bool has_authors =
      matrix.rows > 0 &&
      std::all_of(matrix.meta.begin(), matrix.meta.end(),
                  [](const star::RowMeta& m) { return !m.author_id.empty(); });
  if (has_authors) {
    star::Partition gold;
    std::map<std::string, int> author_ids;
    for (const auto& meta : matrix.meta) {
      auto [it, fresh] =
          author_ids.emplace(meta.author_id, int(author_ids.size()));
      (void)fresh;
      gold.assignment.push_back(it->second);
    }
    gold.clusters = int(author_ids.size());
    star::BCubedScore score = star::bcubed(partition, gold);
    report["bcubed"] = json{{"precision", score.precision},
                            {"recall", score.recall},
                            {"f1", score.f1}};
  }
  write_report(report, args.out);

  std::map<std::string, std::string> outputs{{"report", args.out}};
  if (!args.csv.empty()) {
    std::string csv = "row,author,cluster\n";
    for (size_t i = 0; i < matrix.rows; ++i) {
      csv += std::to_string(i) + "," + matrix.meta[i].author_id + "," +
             std::to_string(partition.assignment[i]) + "\n";
    }
    star::atomic_write_file(args.csv, csv);
    outputs["csv"] = args.csv;
  }
  write_manifest_for("eval cluster", 0,
                     json{{"threshold", args.threshold}},
                     {{"embeddings", args.embeddings}}, outputs, args.out);
  std::printf("eval cluster: %d clusters -> %s\n", partition.clusters,
              args.out.c_str());
}

// ------------------------------------------------------------ eval trials

struct TrialsArgs {
  std::string checkpoint;
  std::string corpus;
  std::string np = "1,2,4,8";
  std::string nn = "10,20,50,100,250,500,all";
  size_t trials = 100;
  uint64_t seed = 0;
  std::string strategy = "prototype";
  std::string out;
  std::string csv;
};

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return parts;
}

void run_eval_trials(const TrialsArgs& args) {
  star::EncoderParams params = load_verified_checkpoint(args.checkpoint);
  star::FeatureConfig config =
      feature_config_for_checkpoint(params, args.checkpoint);
  star::CorpusIndex corpus = load_verified_corpus(args.corpus);
  star::AttributionStrategy strategy =
      star::attribution_strategy_from_string(args.strategy);

  std::vector<uint32_t> np_list;
  for (const std::string& part : split_csv_list(args.np)) {
    try {
      np_list.push_back(uint32_t(std::stoul(part)));
    } catch (const std::exception&) {
      throw star::ConfigError("--np entries must be integers, got: " + part);
    }
  }
  std::vector<size_t> nn_list;
  for (const std::string& part : split_csv_list(args.nn)) {
    if (part == "all") {
      nn_list.push_back(0);
      continue;
    }
    try {
      nn_list.push_back(std::stoul(part));
    } catch (const std::exception&) {
      throw star::ConfigError("--nn entries must be integers or 'all', got: " +
                              part);
    }
  }

  star::TrialReport trials_report = star::run_trials(
      corpus, params, config, np_list, nn_list, args.trials, args.seed,
      strategy);

  json report{{"format", "star-trials-report"},
              {"version", 1},
              {"strategy", args.strategy},
              {"trials", args.trials},
              {"seed", args.seed}};
  json cells = json::array();
  std::string csv =
      "n_p,n_n,n_n_resolved,trials,acc_mean,acc_std,top5_mean,top5_std\n";
  for (const auto& [key, cell] : trials_report.grid) {
    json row{{"n_p", key.first},
             {"n_n_resolved", cell.n_n_resolved},
             {"trials", cell.trials},
             {"acc_mean", cell.acc_mean},
             {"acc_std", cell.acc_std},
             {"top5_mean", cell.top5_mean},
             {"top5_std", cell.top5_std}};
    if (key.second == 0) {
      row["n_n"] = "all";
    } else {
      row["n_n"] = key.second;
    }
    cells.push_back(row);
    csv += std::to_string(key.first) + "," +
           (key.second == 0 ? std::string("all") : std::to_string(key.second)) +
           "," + std::to_string(cell.n_n_resolved) + "," +
           std::to_string(cell.trials) + "," + fmt_g17(cell.acc_mean) + "," +
           fmt_g17(cell.acc_std) + "," + fmt_g17(cell.top5_mean) + "," +
           fmt_g17(cell.top5_std) + "\n";
  }
  report["cells"] = cells;
  write_report(report, args.out);

  std::map<std::string, std::string> outputs{{"report", args.out}};
  if (!args.csv.empty()) {
    star::atomic_write_file(args.csv, csv);
    outputs["csv"] = args.csv;
  }
  write_manifest_for("eval trials", args.seed,
                     json{{"np", args.np},
                          {"nn", args.nn},
                          {"trials", args.trials},
                          {"strategy", args.strategy}},
                     {{"checkpoint", args.checkpoint}, {"corpus", args.corpus}},
                     outputs, args.out);
  std::printf("eval trials: %zu cells -> %s\n", trials_report.grid.size(),
              args.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "star: authorship representation pipeline "
      "(ingest, train, embed, evaluate)"};
  app.require_subcommand(1);
  app.footer(
      "Environment:\n"
      "  STAR_THREADS     caps worker threads (0 or 1 disables threading)\n"
      "  STAR_TIMESTAMP   fixes manifest timestamps for reproducible runs");

  IngestArgs ingest;
  CLI::App* cmd_ingest =
      app.add_subcommand("ingest", "Build a corpus file from JSONL documents");
  cmd_ingest->add_option("--input", ingest.input,
                         "JSONL with author/dataset/text per line")
      ->required();
  cmd_ingest->add_option("--out", ingest.out, "Corpus output path")->required();
  cmd_ingest->add_option("--seed", ingest.seed, "Seed recorded in the manifest");
  cmd_ingest->add_option("--max-len", ingest.max_len,
                         "Chunk length in tokens (default 512)");
  cmd_ingest->add_option("--min-docs", ingest.min_docs,
                         "Minimum chunks per author (default 16)");
  cmd_ingest->add_option("--min-tail", ingest.min_tail,
                         "Minimum length of a final partial chunk (default 32)");
  cmd_ingest->add_flag("--keep-anonymous", ingest.keep_anonymous,
                       "Keep anonymous/unknown/joint author ids");
  CLI::Option* no_clean = cmd_ingest->add_flag(
      "--no-clean", ingest.no_clean, "Disable URL/mention replacement");
  cmd_ingest
      ->add_option("--clean-dataset", ingest.clean_datasets,
                   "Clean only these datasets (repeatable)")
      ->excludes(no_clean);
  cmd_ingest->add_option("--pack-dataset", ingest.pack_datasets,
                         "Pack short texts for these datasets (repeatable)");
  cmd_ingest->add_option("--drop-edges-dataset", ingest.drop_edge_datasets,
                         "Drop first/last chunk per document (repeatable)");
  cmd_ingest->add_option("--share", ingest.shares,
                         "Dataset share as name=weight (repeatable)");

  TrainArgs train_args;
  CLI::App* cmd_train = app.add_subcommand(
      "train", "Train the contrastive encoder on a corpus file");
  cmd_train->add_option("--corpus", train_args.corpus, "Corpus file")
      ->required();
  cmd_train->add_option("--config", train_args.config_path,
                        "Training config JSON (defaults when omitted)");
  cmd_train->add_option("--out", train_args.out, "Checkpoint output path")
      ->required();
  cmd_train->add_option("--metrics", train_args.metrics,
                        "Metrics CSV path (default <out>.metrics.csv)");
  CLI::Option* seed_opt = cmd_train->add_option(
      "--seed", train_args.seed, "Overrides the config seed");

  EmbedArgs embed;
  CLI::App* cmd_embed = app.add_subcommand(
      "embed", "Embed a corpus or raw texts with a trained checkpoint");
  cmd_embed->add_option("--checkpoint", embed.checkpoint, "Checkpoint file")
      ->required();
  CLI::Option* embed_corpus =
      cmd_embed->add_option("--corpus", embed.corpus, "Corpus file to embed");
  cmd_embed
      ->add_option("--texts", embed.texts,
                   "JSONL with a text field per line (author optional)")
      ->excludes(embed_corpus);
  cmd_embed->add_option("--out", embed.out, "Embedding output path")
      ->required();

  CLI::App* cmd_eval =
      app.add_subcommand("eval", "Evaluate a trained encoder");
  cmd_eval->require_subcommand(1);

  AttribArgs attrib;
  CLI::App* cmd_attrib = cmd_eval->add_subcommand(
      "attrib", "Attribute unknown documents to known authors");
  cmd_attrib->add_option("--checkpoint", attrib.checkpoint, "Checkpoint file")
      ->required();
  cmd_attrib
      ->add_option("--dir", attrib.dir,
                   "Problem directory: known/<author>/*.txt, unknown/*.txt, "
                   "optional gold.json")
      ->required();
  cmd_attrib->add_option("--strategy", attrib.strategy,
                         "prototype or nearest_chunk (default prototype)");
  cmd_attrib->add_option("--out", attrib.out, "Report JSON path")->required();
  cmd_attrib->add_option("--csv", attrib.csv, "Optional report CSV path");

  VerifyArgs verify;
  CLI::App* cmd_verify = cmd_eval->add_subcommand(
      "verify", "Train and score a same-author verifier head");
  cmd_verify->add_option("--checkpoint", verify.checkpoint, "Checkpoint file")
      ->required();
  cmd_verify->add_option("--corpus", verify.corpus, "Corpus file")->required();
  cmd_verify->add_option("--pairs", verify.pairs,
                         "Pairs per class per split (default 200)");
  cmd_verify->add_option("--epochs", verify.epochs,
                         "Verifier training epochs (default 200)");
  cmd_verify->add_option("--lr", verify.lr,
                         "Verifier learning rate (default 1.0)");
  cmd_verify->add_option("--seed", verify.seed, "Pair sampling seed");
  cmd_verify->add_option("--out", verify.out, "Report JSON path")->required();
  cmd_verify->add_option("--csv", verify.csv, "Optional report CSV path");

  ClusterArgs cluster_args;
  CLI::App* cmd_cluster = cmd_eval->add_subcommand(
      "cluster", "Cluster an embedding file by cosine distance");
  cmd_cluster
      ->add_option("--embeddings", cluster_args.embeddings, "Embedding file")
      ->required();
  cmd_cluster->add_option(
      "--threshold", cluster_args.threshold,
      "Average-linkage merge threshold in [0, 2] (default 0.3)");
  cmd_cluster->add_option("--out", cluster_args.out, "Report JSON path")
      ->required();
  cmd_cluster->add_option("--csv", cluster_args.csv,
                          "Optional report CSV path");

  TrialsArgs trials;
  CLI::App* cmd_trials = cmd_eval->add_subcommand(
      "trials", "Attribution trials over an (N_p, N_n) grid");
  cmd_trials->add_option("--checkpoint", trials.checkpoint, "Checkpoint file")
      ->required();
  cmd_trials->add_option("--corpus", trials.corpus, "Test corpus file")
      ->required();
  cmd_trials->add_option("--np", trials.np,
                         "Comma list of support counts (default 1,2,4,8)");
  cmd_trials->add_option(
      "--nn", trials.nn,
      "Comma list of candidate counts, 'all' allowed "
      "(default 10,20,50,100,250,500,all)");
  cmd_trials->add_option("--trials", trials.trials,
                         "Trials per cell (default 100)");
  cmd_trials->add_option("--seed", trials.seed, "Trial sampling seed");
  cmd_trials->add_option("--strategy", trials.strategy,
                         "prototype or nearest_chunk (default prototype)");
  cmd_trials->add_option("--out", trials.out, "Report JSON path")->required();
  cmd_trials->add_option("--csv", trials.csv, "Optional report CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*cmd_ingest) {
      run_ingest(ingest);
    } else if (*cmd_train) {
      train_args.seed_set = seed_opt->count() > 0;
      run_train(train_args);
    } else if (*cmd_embed) {
      if (embed.corpus.empty() && embed.texts.empty()) {
        throw star::ConfigError("embed needs --corpus or --texts");
      }
      run_embed(embed);
    } else if (*cmd_attrib) {
      run_eval_attrib(attrib);
    } else if (*cmd_verify) {
      run_eval_verify(verify);
    } else if (*cmd_cluster) {
      run_eval_cluster(cluster_args);
    } else if (*cmd_trials) {
      run_eval_trials(trials);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "star: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
