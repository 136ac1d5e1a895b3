#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "star/corpus.hpp"
#include "star/encoder.hpp"
#include "star/featurize.hpp"
#include "star/rng.hpp"

namespace star {

// How a candidate author is matched against a query embedding:
// nearest_chunk scores by the single most similar support chunk,
// prototype by the renormalized mean of the support chunks.
enum class AttributionStrategy { nearest_chunk, prototype };

std::string to_string(AttributionStrategy strategy);
AttributionStrategy attribution_strategy_from_string(const std::string& name);

struct AttributionProblem {
  std::map<std::string, std::vector<TokenSeq>> known;  // author -> chunks
  std::vector<TokenSeq> unknown;
  // Aligned with unknown; absent entries mean unlabeled.
  std::vector<std::optional<std::string>> gold;
};

// Renormalized mean of unit rows; the zero mean (exactly antipodal
// supports) is an error.
std::vector<double> prototype_of(const std::vector<const double*>& rows,
                                 uint32_t d);

// Cosine score of each candidate against one query. candidates[c] is the
// candidate's support embeddings (unit rows of length d).
std::vector<double> candidate_scores(
    const std::vector<std::vector<const double*>>& candidates,
    const std::vector<double>& query, uint32_t d,
    AttributionStrategy strategy);

// Candidate order, best first; equal scores break toward the lower index.
std::vector<size_t> rank_by_score(const std::vector<double>& scores);

// Predicted author per unknown chunk. Authors are enumerated in sorted
// id order, which is also the tie-break order.
std::vector<std::string> attribute(const AttributionProblem& problem,
                                   const EncoderParams& params,
                                   const FeatureConfig& config,
                                   AttributionStrategy strategy);

struct AttributionScore {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// accuracy over all indices; macro F1 averaged over authors present in
// gold only.
AttributionScore score_attribution(const std::vector<std::string>& predictions,
                                   const std::vector<std::string>& gold);

// [e_a | e_b | |e_a - e_b| | e_a * e_b], exactly 4d entries.
std::vector<double> verification_features(const std::vector<double>& e_a,
                                          const std::vector<double>& e_b);

struct VerifierHead {
  std::vector<double> weights;  // 4d
  double bias = 0.0;
};

struct VerifierPair {
  std::vector<double> a;
  std::vector<double> b;
  bool same_author = false;
};

// Full-batch logistic regression from a zero head; keeps the best-loss
// iterate, so the returned head never scores worse than the start.
VerifierHead train_verifier(const std::vector<VerifierPair>& pairs,
                            size_t epochs, double lr);

double verifier_logit(const VerifierHead& head, const std::vector<double>& e_a,
                      const std::vector<double>& e_b);
double verifier_probability(const VerifierHead& head,
                            const std::vector<double>& e_a,
                            const std::vector<double>& e_b);

struct VerificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Threshold at probability 0.5; same_author is the positive class.
VerificationReport evaluate_verifier(const VerifierHead& head,
                                     const std::vector<VerifierPair>& pairs);

struct Partition {
  std::vector<int> assignment;  // item -> dense cluster id
  int clusters = 0;
};

// Average-linkage agglomerative clustering on cosine distance 1 - cos.
// Merges run while the smallest linkage is < threshold; threshold 2 also
// takes distances equal to 2 so the full merge is reachable. Merge order:
// lowest distance, then lowest cluster pair. Cluster ids are dense, in
// first-item order.
Partition cluster(const EmbeddingMatrix& embeddings, double threshold);

struct BCubedScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

BCubedScore bcubed(const Partition& pred, const Partition& gold);

struct TrialCell {
  size_t n_n_resolved = 0;  // actual candidate count ("all" resolves here)
  size_t trials = 0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double top5_mean = 0.0;
  double top5_std = 0.0;
};

struct TrialReport {
  // Keyed by (N_p, N_n as requested); N_n == 0 means "all eligible".
  std::map<std::pair<uint32_t, size_t>, TrialCell> grid;
};

// Per trial: N_n candidate authors, each giving N_p support chunks and one
// held-out query; queries are attributed against the candidates and top-1 /
// top-5 hits recorded. Mean and sample std over trials. Deterministic in
// seed; trials are independent streams.
TrialReport run_trials(const CorpusIndex& test_corpus,
                       const EncoderParams& params, const FeatureConfig& config,
                       const std::vector<uint32_t>& np_list,
                       const std::vector<size_t>& nn_list, size_t trials,
                       uint64_t seed,
                       AttributionStrategy strategy =
                           AttributionStrategy::prototype);

}  // namespace star
