#include "star/supcon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "star/error.hpp"
#include "star/parallel.hpp"

namespace star {

std::string to_string(DenominatorMode mode) {
  return mode == DenominatorMode::negatives_only ? "negatives_only"
                                                 : "all_others";
}

DenominatorMode denominator_mode_from_string(const std::string& name) {
  if (name == "negatives_only") return DenominatorMode::negatives_only;
  if (name == "all_others") return DenominatorMode::all_others;
  throw ConfigError("unknown denominator mode \"" + name +
                    "\"; expected negatives_only or all_others");
}

namespace {

// Pairwise dot products scaled by 1/tau, plus the positive counts, shared
// between forward and backward.
struct BatchGeometry {
  size_t b = 0;
  std::vector<double> s;           // b*b, s[i*b+j] = e_i . e_j / tau
  std::vector<size_t> pos_count;   // |P(i)|
};

BatchGeometry batch_geometry(const EmbeddingMatrix& E,
                             const std::vector<int>& labels, double tau) {
  if (!(tau > 0.0)) {
    throw Error("supcon: tau must be positive, got " + std::to_string(tau));
  }
  if (labels.size() != E.rows) {
    throw Error("supcon: " + std::to_string(labels.size()) + " labels for " +
                std::to_string(E.rows) + " rows");
  }
  if (E.rows < 2) throw Error("supcon: batch needs at least 2 rows");

  BatchGeometry g;
  g.b = E.rows;
  for (size_t i = 0; i < g.b; ++i) {
    double ss = 0;
    for (uint32_t c = 0; c < E.dim; ++c) ss += E.row(i)[c] * E.row(i)[c];
    if (std::abs(ss - 1.0) > 1e-6) {
      throw Error("supcon: row " + std::to_string(i) + " has squared norm " +
                  std::to_string(ss) + "; rows must be unit");
    }
  }
  g.s.resize(g.b * g.b);
  for (size_t i = 0; i < g.b; ++i) {
    for (size_t j = 0; j < g.b; ++j) {
      double dot = 0;
      for (uint32_t c = 0; c < E.dim; ++c) dot += E.row(i)[c] * E.row(j)[c];
      g.s[i * g.b + j] = dot / tau;
    }
  }
  g.pos_count.assign(g.b, 0);
  for (size_t i = 0; i < g.b; ++i) {
    for (size_t j = 0; j < g.b; ++j) {
      if (j != i && labels[j] == labels[i]) ++g.pos_count[i];
    }
    if (g.pos_count[i] == 0) {
      throw Error("supcon: anchor " + std::to_string(i) +
                  " has no positive in the batch");
    }
  }
  return g;
}

bool in_denominator(const std::vector<int>& labels, size_t i, size_t j,
                    DenominatorMode mode) {
  if (j == i) return false;
  return mode == DenominatorMode::all_others || labels[j] != labels[i];
}

// Log-sum-exp over the anchor's denominator set, max-subtracted.
double anchor_lse(const BatchGeometry& g, const std::vector<int>& labels,
                  size_t i, DenominatorMode mode) {
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < g.b; ++j) {
    if (in_denominator(labels, i, j, mode)) hi = std::max(hi, g.s[i * g.b + j]);
  }
  double sum = 0;
  for (size_t j = 0; j < g.b; ++j) {
    if (in_denominator(labels, i, j, mode)) {
      sum += std::exp(g.s[i * g.b + j] - hi);
    }
  }
  return hi + std::log(sum);
}

}  // namespace

LossBreakdown supcon_loss(const EmbeddingMatrix& E,
                          const std::vector<int>& labels, double tau,
                          DenominatorMode mode) {
  auto g = batch_geometry(E, labels, tau);
  LossBreakdown out;
  out.tau = tau;
  out.mode = mode;
  out.per_anchor.resize(g.b);
  parallel_for(g.b, [&](size_t i) {
    const double lse = anchor_lse(g, labels, i, mode);
    double pos_sum = 0;
    for (size_t j = 0; j < g.b; ++j) {
      if (j != i && labels[j] == labels[i]) pos_sum += g.s[i * g.b + j];
    }
    out.per_anchor[i] = lse - pos_sum / double(g.pos_count[i]);
  });
  // Fixed-order reduction keeps the total bit-stable across thread counts.
  out.total = 0;
  for (double term : out.per_anchor) out.total += term;
  return out;
}

SupconGradients supcon_grad(const std::vector<FeatureVector>& features,
                            const std::vector<int>& labels,
                            const EncoderParams& params, DenominatorMode mode) {
  const size_t b = features.size();
  const uint32_t d = params.d;
  const double tau = params.tau();

  // Forward: keep the pre-normalization projections and their norms for
  // the backward pass through e = y / ||y||.
  EmbeddingMatrix E;
  E.rows = b;
  E.dim = d;
  E.data.resize(b * size_t(d));
  E.meta.resize(b);
  std::vector<double> y(b * size_t(d));
  std::vector<double> norms(b);
  parallel_for(b, [&](size_t i) {
    auto yi = project(features[i], params);
    double ss = 0;
    for (uint32_t c = 0; c < d; ++c) ss += yi[c] * yi[c];
    const double n = std::sqrt(ss);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error("supcon_grad: anchor " + std::to_string(i) +
                  ": projection norm " + std::to_string(n));
    }
    norms[i] = n;
    for (uint32_t c = 0; c < d; ++c) {
      y[i * d + c] = yi[c];
      E.row(i)[c] = yi[c] / n;
    }
  });

  auto geom = batch_geometry(E, labels, tau);

  SupconGradients out;
  out.loss.tau = tau;
  out.loss.mode = mode;
  out.loss.per_anchor.resize(b);

  // dL/ds_ij = q_ij [j in D(i)] - 1/|P(i)| [j in P(i)], with q the
  // softmax of s over D(i).
  std::vector<double> grad_s(b * b, 0.0);
  parallel_for(b, [&](size_t i) {
    const double lse = anchor_lse(geom, labels, i, mode);
    if (!std::isfinite(lse)) {
      throw Error("supcon_grad: anchor " + std::to_string(i) +
                  ": non-finite log-sum-exp");
    }
    double pos_sum = 0;
    const double inv_p = 1.0 / double(geom.pos_count[i]);
    for (size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      double gij = 0;
      if (in_denominator(labels, i, j, mode)) {
        gij += std::exp(geom.s[i * b + j] - lse);
      }
      if (labels[j] == labels[i]) {
        gij -= inv_p;
        pos_sum += geom.s[i * b + j];
      }
      grad_s[i * b + j] = gij;
    }
    out.loss.per_anchor[i] = lse - pos_sum * inv_p;
  });
  out.loss.total = 0;
  for (double term : out.loss.per_anchor) out.loss.total += term;

  // dL/de_r = (1/tau) sum_j (grad_s[r][j] + grad_s[j][r]) e_j, and
  // dL/dlog_tau = tau * dL/dtau = -sum_ij grad_s[i][j] * s_ij.
  std::vector<double> dE(b * size_t(d), 0.0);
  double dlog_tau = 0.0;
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      dlog_tau -= grad_s[i * b + j] * geom.s[i * b + j];
    }
  }
  parallel_for(b, [&](size_t r) {
    for (size_t j = 0; j < b; ++j) {
      const double w = (grad_s[r * b + j] + grad_s[j * b + r]) / tau;
      if (w == 0.0) continue;
      for (uint32_t c = 0; c < d; ++c) dE[r * d + c] += w * E.row(j)[c];
    }
    for (uint32_t c = 0; c < d; ++c) {
      if (!std::isfinite(dE[r * d + c])) {
        throw Error("supcon_grad: anchor " + std::to_string(r) +
                    ": non-finite embedding gradient");
      }
    }
  });
  if (!std::isfinite(dlog_tau)) {
    throw Error("supcon_grad: non-finite temperature gradient");
  }
  out.dlog_tau = dlog_tau;

  // Through the normalization: dL/dy = (dL/de - (dL/de . e) e) / ||y||,
  // then into the sparse projection. Rows accumulate in index order so
  // the result is independent of thread count.
  out.dW.assign(params.W.size(), 0.0);
  out.dbias.assign(d, 0.0);
  std::vector<double> dy(b * size_t(d));
  parallel_for(b, [&](size_t i) {
    double along = 0;
    for (uint32_t c = 0; c < d; ++c) along += dE[i * d + c] * E.row(i)[c];
    for (uint32_t c = 0; c < d; ++c) {
      dy[i * d + c] = (dE[i * d + c] - along * E.row(i)[c]) / norms[i];
    }
  });
  for (size_t i = 0; i < b; ++i) {
    for (const auto& [bucket, value] : features[i].entries) {
      double* row = out.dW.data() + size_t(bucket) * d;
      for (uint32_t c = 0; c < d; ++c) row[c] += value * dy[i * d + c];
    }
    for (uint32_t c = 0; c < d; ++c) out.dbias[c] += dy[i * d + c];
  }
  return out;
}

SupconGradients supcon_grad(const MultiViewBatch& batch,
                            const EncoderParams& params,
                            const FeatureConfig& config, DenominatorMode mode) {
  std::vector<FeatureVector> features(batch.size());
  parallel_for(batch.size(), [&](size_t i) {
    features[i] = featurize(batch.chunks[i]->tokens, config);
  });
  return supcon_grad(features, batch.labels, params, mode);
}

}  // namespace star
