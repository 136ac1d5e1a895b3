#pragma once

#include <string>
#include <vector>

#include "star/encoder.hpp"
#include "star/featurize.hpp"
#include "star/sampler.hpp"

namespace star {

// Denominator index set of the contrastive softmax. negatives_only uses
// the cross-author indices A(i); all_others uses every index except the
// anchor, the canonical SupCon form. With negatives_only the positive
// ratio can exceed 1, so per-anchor terms may be negative; they are never
// clamped.
enum class DenominatorMode { negatives_only, all_others };

std::string to_string(DenominatorMode mode);
DenominatorMode denominator_mode_from_string(const std::string& name);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_anchor;
  double tau = 0.0;
  DenominatorMode mode = DenominatorMode::negatives_only;
};

// Per anchor i with positives P(i) and denominator set D(i):
//   -(1/|P(i)|) sum_{p in P(i)} [ s_ip - LSE_{a in D(i)} s_ia ],
// s_ij = e_i . e_j / tau, log-sum-exp with max subtraction. Rows of E
// must be unit-norm; every anchor needs at least one positive.
LossBreakdown supcon_loss(const EmbeddingMatrix& E,
                          const std::vector<int>& labels, double tau,
                          DenominatorMode mode);

struct SupconGradients {
  LossBreakdown loss;
  std::vector<double> dW;     // V*d, row-major like EncoderParams::W
  std::vector<double> dbias;  // d
  double dlog_tau = 0.0;
};

// Exact analytic gradient of supcon_loss composed with the encoder,
// through the L2-normalization Jacobian and d(tau)/d(log_tau) = tau.
// features[i] pairs with labels[i].
SupconGradients supcon_grad(const std::vector<FeatureVector>& features,
                            const std::vector<int>& labels,
                            const EncoderParams& params, DenominatorMode mode);

// Convenience wrapper featurizing a sampled batch.
SupconGradients supcon_grad(const MultiViewBatch& batch,
                            const EncoderParams& params,
                            const FeatureConfig& config, DenominatorMode mode);

}  // namespace star
