#pragma once

#include <string>
#include <vector>

#include "kgrumor/kg.hpp"

namespace kgrumor {
namespace pipeline {

// Visual feature sequences are region grids: always 49 rows.
inline constexpr int kVisualRows = 49;
// Text sequences are capped at 128 positions.
inline constexpr int kMaxTextRows = 128;

// Synthetic posts may carry `feature_seed` instead of explicit feature
// arrays; these constants fix the expanded shapes.
inline constexpr int kSynthTextRows = 16;
inline constexpr int kSynthFeatureDim = 32;

struct Post {
  std::string id;
  int label = 0;  // 0 = rumor, 1 = non-rumor
  std::vector<std::string> text_entities;
  std::vector<std::string> visual_entities;
  std::vector<std::vector<double>> text_features;    // (L <= 128, d_raw)
  std::vector<std::vector<double>> visual_features;  // (49, d_raw)

  double rumor_target() const { return label == 0 ? 1.0 : 0.0; }
};

// Deterministic expansion of a feature seed. Non-rumor posts repeat one
// latent across both modalities, rumor posts negate it in the visual stream,
// and a small neutral fraction uses an unrelated latent; every position adds
// Gaussian noise on top.
void expand_features(std::uint64_t feature_seed, int label,
                     std::vector<std::vector<double>>& text_features,
                     std::vector<std::vector<double>>& visual_features);

// True when the seed expands into the unrelated-latent (neutral) pattern.
// The generator screens candidate seeds with this to coordinate feature and
// entity layouts per post.
bool feature_seed_is_neutral(std::uint64_t feature_seed);

// JSON Lines, one post object per line. Feature arrays must be rectangular
// with a consistent width across the whole file; violations throw naming the
// post. Returns the posts and the feature width.
struct Dataset {
  std::vector<Post> posts;
  int d_raw = 0;
};
Dataset load_posts(const std::string& path);

// Entity names resolved against the graph; unknown names and entities
// without embeddings are dropped (counted in *dropped). Results are sorted,
// deduplicated ids.
std::vector<kg::EntityId> resolve_entities(const std::vector<std::string>& names,
                                           const kg::KnowledgeGraph& graph,
                                           const kg::EmbeddingTable& emb, int* dropped);

}  // namespace pipeline
}  // namespace kgrumor
