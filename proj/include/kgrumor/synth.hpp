#pragma once

#include <cstdint>
#include <string>

namespace kgrumor {
namespace pipeline {

// Community-structured synthetic dataset: an entity graph of densely
// connected communities joined by sparse bridges, embeddings clustered
// around community centroids, and posts whose entity choices and feature
// latents encode the label (with a controlled corruption rate on each
// signal so neither suffices alone).
struct SynthConfig {
  int entities = 300;
  int communities = 4;
  int posts = 400;
  std::uint64_t seed = 42;
  std::string out_dir;  // receives triples.tsv, embeddings.txt, posts.jsonl
};

struct SynthPaths {
  std::string triples;
  std::string embeddings;
  std::string posts;
};

// Writes the three files; byte-identical for equal configs. Throws when the
// sizes cannot form the requested communities.
SynthPaths generate_synthetic(const SynthConfig& cfg);

}  // namespace pipeline
}  // namespace kgrumor
