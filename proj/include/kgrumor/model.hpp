#pragma once

#include "kgrumor/bsc.hpp"
#include "kgrumor/config.hpp"
#include "kgrumor/dataset.hpp"
#include "kgrumor/kec.hpp"

namespace kgrumor {
namespace pipeline {

using nn::Tensor;

// Every trainable tensor in the classifier head. Initialization order is
// fixed and independent of ablation flags, so a seed always produces the
// same weights.
struct ModelParameters {
  Tensor text_adapter_w, text_adapter_b;      // (d_raw,d), (1,d)
  Tensor visual_adapter_w, visual_adapter_b;  // (d_raw,d), (1,d)
  Tensor dictionary;                          // (M,d) shared atoms
  nn::TransformerLayer alignment;             // shared across both modalities
  Tensor agg_w, agg_b;                        // (d,d), (1,d)
  Tensor kec_projection;                      // (2*d_e, 2*d)
  Tensor classifier_w, classifier_b;          // (18*d,1), (1,1)

  int d = 0, d_e = 0, d_raw = 0;

  static ModelParameters init(const RunConfig& cfg, int d_raw, std::uint64_t seed);

  std::vector<nn::Tensor*> all();
  // Group name per parameter, aligned with all(); used by optimizer wiring
  // and the gradient check report.
  std::vector<std::pair<std::string, nn::Tensor*>> named();
};

// One post, ready for the forward pass: adapted-input constants plus the
// precomputed pair correlations for the three pair sets.
struct PostContext {
  std::string id;
  double target = 0.0;  // rumor indicator
  Tensor text_raw;      // (L, d_raw), no grad
  Tensor visual_raw;    // (49, d_raw), no grad
  std::vector<paths::PairCorrelation> tt, vv, tv;
};

PostContext make_context(const Post& post, const kg::KnowledgeGraph& graph,
                         const kg::EmbeddingTable& emb, const RunConfig& cfg, double d_max,
                         paths::PairCache& cache, int* dropped_entities);

// sigmoid(W_c^T [inc ; con ; tt ; tv ; vv] + b_c) -> rumor probability (1,1)
Tensor classify(const Tensor& inconsistency, const Tensor& consistency, const Tensor& corr_tt,
                const Tensor& corr_tv, const Tensor& corr_vv, const ModelParameters& params);

// Full head over one post. Honors every ablation flag; disabled branches
// contribute zero constants and their private parameters stay out of the
// recorded graph.
Tensor forward_post(const PostContext& ctx, const ModelParameters& params, const RunConfig& cfg);

void save_model(const ModelParameters& params, const RunConfig& cfg, double d_max,
                const std::string& path);

struct LoadedModel {
  ModelParameters params;
  RunConfig config;
  double d_max = 0.0;
};
LoadedModel load_model(const std::string& path);

}  // namespace pipeline
}  // namespace kgrumor
