#pragma once

#include "kgrumor/layers.hpp"
#include "kgrumor/paths.hpp"

namespace kgrumor {
namespace kec {

using kg::EntityId;
using nn::Tensor;
using paths::PairCorrelation;

struct EntityPair {
  EntityId u = 0, v = 0;  // canonical, u <= v
  bool operator==(const EntityPair& o) const { return u == o.u && v == o.v; }
  bool operator<(const EntityPair& o) const { return u < o.u || (u == o.u && v < o.v); }
};

struct PairSets {
  std::vector<EntityPair> tt;  // text-text
  std::vector<EntityPair> vv;  // visual-visual
  std::vector<EntityPair> tv;  // text-visual
};

// All unordered pairs within each modality plus the full cross product,
// canonicalized, deduplicated, in ascending pair order. With disjoint
// deduplicated inputs the counts are N(N-1)/2, N(N-1)/2 and N_T*N_V.
PairSets build_pair_sets(const std::vector<EntityId>& text_entities,
                         const std::vector<EntityId>& visual_entities);

struct Selection {
  std::vector<int> relevant;    // indices of the k smallest D_s, ascending D_s
  std::vector<int> irrelevant;  // indices of the k largest D_s, descending D_s
};

// Ties break on canonical pair id, lexicographically ascending. When fewer
// than k pairs exist both subsets take everything.
Selection select_topk(const std::vector<PairCorrelation>& pairs, int k);

// Signed attention over projected pair representations. reps is (k, w),
// query (1, w); scores are query . rep / sqrt(w). Distances are clamped
// below at 1e-6.
//   positive: lambda = softmax(score);  out = sum(lambda_i/d_i * rep_i) / sum(lambda_i/d_i)
//   negative: lambda = -softmax(-score); out = sum(lambda_i*d_i * rep_i) / sum(lambda_i*d_i)
// raw_lambda, when given, receives the k raw coefficients (the negative ones
// sum to -1). Throws on empty reps or non-finite scores.
Tensor signed_attention_positive(const Tensor& query, const Tensor& reps,
                                 const std::vector<double>& distances,
                                 Tensor* raw_lambda = nullptr);
Tensor signed_attention_negative(const Tensor& query, const Tensor& reps,
                                 const std::vector<double>& distances,
                                 Tensor* raw_lambda = nullptr);

// One pair set -> (1, 4d) correlation [f_re ; f_ir]. Each selected pair
// contributes [h_u ; h_v] (2*d_e wide) projected through the trainable map
// `projection` (2*d_e, 2*d); projected vectors serve as keys and values.
// Empty pair set -> zeros. zero_relevant / zero_irrelevant blank the
// respective half (ablation wiring).
Tensor entity_correlation(const Tensor& query, const std::vector<PairCorrelation>& pairs,
                          int k, const Tensor& projection, bool zero_relevant = false,
                          bool zero_irrelevant = false);

}  // namespace kec
}  // namespace kgrumor
