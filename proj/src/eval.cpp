#include "star/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "star/error.hpp"
#include "star/parallel.hpp"

namespace star {

namespace {

double dot(const double* a, const double* b, uint32_t d) {
  double s = 0.0;
  for (uint32_t j = 0; j < d; ++j) s += a[j] * b[j];
  return s;
}

double harmonic(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

std::string to_string(AttributionStrategy strategy) {
  switch (strategy) {
    case AttributionStrategy::nearest_chunk:
      return "nearest_chunk";
    case AttributionStrategy::prototype:
      return "prototype";
  }
  throw Error("unhandled attribution strategy");
}

AttributionStrategy attribution_strategy_from_string(const std::string& name) {
  if (name == "nearest_chunk") return AttributionStrategy::nearest_chunk;
  if (name == "prototype") return AttributionStrategy::prototype;
  throw ConfigError("unknown attribution strategy: " + name);
}

std::vector<double> prototype_of(const std::vector<const double*>& rows,
                                 uint32_t d) {
  if (rows.empty()) throw Error("prototype of zero support chunks");
  std::vector<double> mean(d, 0.0);
  for (const double* row : rows) {
    for (uint32_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (uint32_t j = 0; j < d; ++j) mean[j] /= double(rows.size());
  double norm = std::sqrt(dot(mean.data(), mean.data(), d));
  if (!std::isfinite(norm) || norm < 1e-12) {
    throw Error("prototype mean is numerically zero; supports cancel out");
  }
  for (uint32_t j = 0; j < d; ++j) mean[j] /= norm;
  return mean;
}

std::vector<double> candidate_scores(
    const std::vector<std::vector<const double*>>& candidates,
    const std::vector<double>& query, uint32_t d,
    AttributionStrategy strategy) {
  if (query.size() != d) throw Error("query dimension mismatch");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (size_t c = 0; c < candidates.size(); ++c) {
    const auto& support = candidates[c];
    if (support.empty()) {
      throw Error("candidate " + std::to_string(c) + " has no support chunks");
    }
    if (strategy == AttributionStrategy::prototype) {
      std::vector<double> proto = prototype_of(support, d);
      scores.push_back(dot(proto.data(), query.data(), d));
    } else {
      double best = -std::numeric_limits<double>::infinity();
      for (const double* row : support) {
        best = std::max(best, dot(row, query.data(), d));
      }
      scores.push_back(best);
    }
  }
  return scores;
}

std::vector<size_t> rank_by_score(const std::vector<double>& scores) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::string> attribute(const AttributionProblem& problem,
                                   const EncoderParams& params,
                                   const FeatureConfig& config,
                                   AttributionStrategy strategy) {
  if (problem.known.size() < 2) {
    throw Error("attribution needs at least two known authors, got " +
                std::to_string(problem.known.size()));
  }
  if (!problem.gold.empty() && problem.gold.size() != problem.unknown.size()) {
    throw Error("gold labels do not align with the unknown chunks");
  }
  for (const auto& label : problem.gold) {
    if (label && !problem.known.count(*label)) {
      throw Error("gold author not in the known set: " + *label);
    }
  }

  std::vector<std::string> authors;
  std::vector<std::vector<std::vector<double>>> embedded;
  for (const auto& [author, chunks] : problem.known) {
    if (chunks.empty()) {
      throw Error("known author has no chunks: " + author);
    }
    authors.push_back(author);
    std::vector<std::vector<double>> rows;
    for (const TokenSeq& chunk : chunks) {
      rows.push_back(encode_chunk(chunk, params, config));
    }
    embedded.push_back(std::move(rows));
  }

  std::vector<std::vector<const double*>> candidates(authors.size());
  for (size_t a = 0; a < embedded.size(); ++a) {
    for (const auto& row : embedded[a]) candidates[a].push_back(row.data());
  }

  std::vector<std::string> predictions;
  predictions.reserve(problem.unknown.size());
  for (const TokenSeq& chunk : problem.unknown) {
    std::vector<double> query = encode_chunk(chunk, params, config);
    std::vector<double> scores =
        candidate_scores(candidates, query, params.d, strategy);
    predictions.push_back(authors[rank_by_score(scores)[0]]);
  }
  return predictions;
}

AttributionScore score_attribution(const std::vector<std::string>& predictions,
                                   const std::vector<std::string>& gold) {
  if (gold.empty()) throw Error("attribution scoring needs gold labels");
  if (predictions.size() != gold.size()) {
    throw Error("prediction count does not match gold label count");
  }

  size_t hits = 0;
  std::map<std::string, size_t> tp, fp, fn;
  std::vector<std::string> gold_authors;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (!tp.count(gold[i])) gold_authors.push_back(gold[i]);
    tp.emplace(gold[i], 0);
    if (predictions[i] == gold[i]) {
      ++hits;
      ++tp[gold[i]];
    } else {
      ++fn[gold[i]];
      ++fp[predictions[i]];
    }
  }

  AttributionScore score;
  score.accuracy = double(hits) / double(gold.size());
  double f1_sum = 0.0;
  for (const std::string& author : gold_authors) {
    double t = double(tp[author]);
    double p_den = t + double(fp.count(author) ? fp[author] : 0);
    double r_den = t + double(fn.count(author) ? fn[author] : 0);
    double precision = p_den == 0.0 ? 0.0 : t / p_den;
    double recall = r_den == 0.0 ? 0.0 : t / r_den;
    f1_sum += harmonic(precision, recall);
  }
  score.macro_f1 = f1_sum / double(gold_authors.size());
  return score;
}

std::vector<double> verification_features(const std::vector<double>& e_a,
                                          const std::vector<double>& e_b) {
  if (e_a.size() != e_b.size()) {
    throw Error("verification features need matching embedding dimensions");
  }
  std::vector<double> features;
  features.reserve(4 * e_a.size());
  features.insert(features.end(), e_a.begin(), e_a.end());
  features.insert(features.end(), e_b.begin(), e_b.end());
  for (size_t j = 0; j < e_a.size(); ++j) {
    features.push_back(std::abs(e_a[j] - e_b[j]));
  }
  for (size_t j = 0; j < e_a.size(); ++j) {
    features.push_back(e_a[j] * e_b[j]);
  }
  return features;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

VerifierHead train_verifier(const std::vector<VerifierPair>& pairs,
                            size_t epochs, double lr) {
  if (pairs.empty()) throw Error("verifier training set is empty");
  bool has_same = false;
  bool has_diff = false;
  for (const auto& pair : pairs) (pair.same_author ? has_same : has_diff) = true;
  if (!has_same || !has_diff) {
    throw Error("verifier training set needs both classes");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("verifier learning rate must be positive");
  }

  std::vector<std::vector<double>> features;
  features.reserve(pairs.size());
  for (const auto& pair : pairs) {
    features.push_back(verification_features(pair.a, pair.b));
    if (features.back().size() != features.front().size()) {
      throw Error("verifier pairs disagree on embedding dimension");
    }
  }
  size_t dim = features.front().size();

  VerifierHead head;
  head.weights.assign(dim, 0.0);
  VerifierHead best = head;
  double best_loss = std::numeric_limits<double>::infinity();

  // Full-batch descent on mean logistic loss; the loss at each iterate is a
  // byproduct of the forward pass, so keeping the best-seen head is free.
  for (size_t epoch = 0; epoch <= epochs; ++epoch) {
    std::vector<double> grad_w(dim, 0.0);
    double grad_b = 0.0;
    double loss = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      double z = head.bias;
      for (size_t j = 0; j < dim; ++j) z += head.weights[j] * features[i][j];
      double p = sigmoid(z);
      double y = pairs[i].same_author ? 1.0 : 0.0;
      loss += y > 0.5 ? -std::log(std::max(p, 1e-300))
                      : -std::log(std::max(1.0 - p, 1e-300));
      double residual = p - y;
      for (size_t j = 0; j < dim; ++j) grad_w[j] += residual * features[i][j];
      grad_b += residual;
    }
    loss /= double(pairs.size());
    if (loss < best_loss) {
      best_loss = loss;
      best = head;
    }
    if (epoch == epochs) break;
    for (size_t j = 0; j < dim; ++j) {
      head.weights[j] -= lr * grad_w[j] / double(pairs.size());
    }
    head.bias -= lr * grad_b / double(pairs.size());
  }
  return best;
}

double verifier_logit(const VerifierHead& head, const std::vector<double>& e_a,
                      const std::vector<double>& e_b) {
  std::vector<double> features = verification_features(e_a, e_b);
  if (features.size() != head.weights.size()) {
    throw Error("verifier head dimension does not match the embeddings");
  }
  double z = head.bias;
  for (size_t j = 0; j < features.size(); ++j) {
    z += head.weights[j] * features[j];
  }
  return z;
}

double verifier_probability(const VerifierHead& head,
                            const std::vector<double>& e_a,
                            const std::vector<double>& e_b) {
  return sigmoid(verifier_logit(head, e_a, e_b));
}

VerificationReport evaluate_verifier(const VerifierHead& head,
                                     const std::vector<VerifierPair>& pairs) {
  if (pairs.empty()) throw Error("verifier evaluation set is empty");
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& pair : pairs) {
    bool predicted_same = verifier_probability(head, pair.a, pair.b) >= 0.5;
    if (predicted_same && pair.same_author) ++tp;
    if (predicted_same && !pair.same_author) ++fp;
    if (!predicted_same && pair.same_author) ++fn;
    if (!predicted_same && !pair.same_author) ++tn;
  }
  VerificationReport report;
  report.accuracy = double(tp + tn) / double(pairs.size());
  report.precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
  report.recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
  report.f1 = harmonic(report.precision, report.recall);
  return report;
}

Partition cluster(const EmbeddingMatrix& embeddings, double threshold) {
  if (!(threshold >= 0.0) || !(threshold <= 2.0)) {
    throw ConfigError("clustering threshold must lie in [0, 2]");
  }
  size_t n = embeddings.rows;
  Partition partition;
  if (n == 0) return partition;

  // Pairwise average-linkage agglomeration with the Lance-Williams update.
  // Quadratic memory is fine at this scale and keeps merges exact.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double d = 1.0 - dot(embeddings.row(i), embeddings.row(j), embeddings.dim);
      dist[i][j] = d;
      dist[j][i] = d;
    }
  }

  std::vector<bool> active(n, true);
  std::vector<size_t> size(n, 1);
  std::vector<int> representative(n);
  std::iota(representative.begin(), representative.end(), 0);

  while (true) {
    double best = std::numeric_limits<double>::infinity();
    size_t best_i = n, best_j = n;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i == n) break;
    bool merge = best < threshold || (threshold == 2.0 && best <= 2.0);
    if (!merge) break;

    for (size_t k = 0; k < n; ++k) {
      if (!active[k] || k == best_i || k == best_j) continue;
      double merged = (double(size[best_i]) * dist[best_i][k] +
                       double(size[best_j]) * dist[best_j][k]) /
                      double(size[best_i] + size[best_j]);
      dist[best_i][k] = merged;
      dist[k][best_i] = merged;
    }
    size[best_i] += size[best_j];
    active[best_j] = false;
    for (size_t k = 0; k < n; ++k) {
      if (representative[k] == int(best_j)) representative[k] = int(best_i);
    }
  }

  std::map<int, int> dense;
  partition.assignment.resize(n);
  for (size_t k = 0; k < n; ++k) {
    auto [it, fresh] = dense.emplace(representative[k], int(dense.size()));
    (void)fresh;
    partition.assignment[k] = it->second;
  }
  partition.clusters = int(dense.size());
  return partition;
}

BCubedScore bcubed(const Partition& pred, const Partition& gold) {
  size_t n = pred.assignment.size();
  if (n == 0) throw Error("cannot score empty partitions");
  if (gold.assignment.size() != n) {
    throw Error("partition sizes differ: " + std::to_string(n) + " vs " +
                std::to_string(gold.assignment.size()));
  }

  // Aggregated form: sum over cluster-pair overlaps of overlap^2 / size.
  std::map<int, size_t> pred_size, gold_size;
  std::map<std::pair<int, int>, size_t> overlap;
  for (size_t i = 0; i < n; ++i) {
    ++pred_size[pred.assignment[i]];
    ++gold_size[gold.assignment[i]];
    ++overlap[{pred.assignment[i], gold.assignment[i]}];
  }

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (const auto& [key, count] : overlap) {
    double squared = double(count) * double(count);
    precision_sum += squared / double(pred_size[key.first]);
    recall_sum += squared / double(gold_size[key.second]);
  }

  BCubedScore score;
  score.precision = precision_sum / double(n);
  score.recall = recall_sum / double(n);
  score.f1 = harmonic(score.precision, score.recall);
  return score;
}

namespace {

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;
};

CellStats mean_std(const std::vector<double>& values) {
  CellStats stats;
  for (double v : values) stats.mean += v;
  stats.mean /= double(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / double(values.size() - 1));
  }
  return stats;
}

std::string cell_name(uint32_t n_p, size_t n_n_requested) {
  std::ostringstream out;
  out << "(N_p=" << n_p << ", N_n=";
  if (n_n_requested == 0) {
    out << "all";
  } else {
    out << n_n_requested;
  }
  out << ")";
  return out.str();
}

}  // namespace

TrialReport run_trials(const CorpusIndex& test_corpus,
                       const EncoderParams& params, const FeatureConfig& config,
                       const std::vector<uint32_t>& np_list,
                       const std::vector<size_t>& nn_list, size_t trials,
                       uint64_t seed, AttributionStrategy strategy) {
  if (np_list.empty() || nn_list.empty()) {
    throw ConfigError("trial grid needs at least one N_p and one N_n");
  }
  if (trials == 0) throw ConfigError("trial count must be positive");
  for (uint32_t n_p : np_list) {
    if (n_p == 0) throw ConfigError("N_p must be positive");
  }

  // Encode every chunk once, grouped back per author.
  std::vector<const Chunk*> chunks = collect_chunks(test_corpus);
  EmbeddingMatrix all = encode_corpus(chunks, params, config);
  std::vector<std::vector<const double*>> author_rows(
      test_corpus.authors.size());
  {
    size_t row = 0;
    for (size_t a = 0; a < test_corpus.authors.size(); ++a) {
      for (size_t c = 0; c < test_corpus.authors[a].chunks.size(); ++c) {
        author_rows[a].push_back(all.row(row++));
      }
    }
  }

  Rng base(seed);
  TrialReport report;
  for (uint32_t n_p : np_list) {
    std::vector<size_t> eligible;
    for (size_t a = 0; a < author_rows.size(); ++a) {
      if (author_rows[a].size() >= size_t(n_p) + 1) eligible.push_back(a);
    }
    for (size_t n_n_requested : nn_list) {
      size_t resolved = n_n_requested == 0 ? eligible.size() : n_n_requested;
      if (resolved == 0 || resolved > eligible.size()) {
        throw Error("trial cell " + cell_name(n_p, n_n_requested) + ": only " +
                    std::to_string(eligible.size()) +
                    " authors have enough chunks");
      }

      Rng cell_rng = base.split(n_p).split(n_n_requested);
      std::vector<double> acc(trials, 0.0);
      std::vector<double> top5(trials, 0.0);
      parallel_for(trials, [&](size_t t) {
        Rng trial_rng = cell_rng.split(t);
        std::vector<size_t> picked =
            trial_rng.sample_without_replacement(eligible.size(), resolved);

        std::vector<std::vector<const double*>> supports(resolved);
        std::vector<const double*> queries(resolved);
        for (size_t c = 0; c < resolved; ++c) {
          const auto& rows = author_rows[eligible[picked[c]]];
          std::vector<size_t> draw =
              trial_rng.sample_without_replacement(rows.size(), n_p + 1);
          for (uint32_t s = 0; s < n_p; ++s) {
            supports[c].push_back(rows[draw[s]]);
          }
          queries[c] = rows[draw[n_p]];
        }

        size_t top1_hits = 0;
        size_t top5_hits = 0;
        for (size_t c = 0; c < resolved; ++c) {
          std::vector<double> query(queries[c], queries[c] + params.d);
          std::vector<double> scores =
              candidate_scores(supports, query, params.d, strategy);
          std::vector<size_t> order = rank_by_score(scores);
          for (size_t pos = 0; pos < order.size(); ++pos) {
            if (order[pos] != c) continue;
            if (pos == 0) ++top1_hits;
            if (pos < 5) ++top5_hits;
            break;
          }
        }
        acc[t] = double(top1_hits) / double(resolved);
        top5[t] = double(top5_hits) / double(resolved);
      });

      CellStats acc_stats = mean_std(acc);
      CellStats top5_stats = mean_std(top5);
      TrialCell cell;
      cell.n_n_resolved = resolved;
      cell.trials = trials;
      cell.acc_mean = acc_stats.mean;
      cell.acc_std = acc_stats.stddev;
      cell.top5_mean = top5_stats.mean;
      cell.top5_std = top5_stats.stddev;
      report.grid[{n_p, n_n_requested}] = cell;
    }
  }
  return report;
}

}  // namespace star
