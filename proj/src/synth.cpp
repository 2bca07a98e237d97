#include "kgrumor/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"
#include "kgrumor/dataset.hpp"

namespace kgrumor {
namespace pipeline {

namespace {

constexpr int kEmbeddingDim = 50;
constexpr double kCentroidScale = 3.0;
constexpr double kEntityJitter = 0.15;
constexpr int kExtraEdgesPerNode = 2;
// Fractions of posts whose entity layout (resp. feature relation) is the
// label-independent neutral pattern. Disjoint by construction, so neither
// signal alone covers every post but the pair does.
constexpr double kEntityNeutral = 0.15;
constexpr double kFeatureNeutral = 0.15;

std::string entity_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "e%04d", id);
  return buf;
}

}  // namespace

SynthPaths generate_synthetic(const SynthConfig& cfg) {
  if (cfg.entities < 2 || cfg.communities < 2 || cfg.posts < 1)
    throw std::runtime_error("synth: sizes must be positive (and at least 2 communities)");
  if (cfg.entities / cfg.communities < 8)
    throw std::runtime_error("synth: too few entities per community");
  std::filesystem::create_directories(cfg.out_dir);

  const int per_comm = cfg.entities / cfg.communities;
  auto community_of = [&](int id) { return std::min(id / per_comm, cfg.communities - 1); };
  auto comm_begin = [&](int c) { return c * per_comm; };
  auto comm_end = [&](int c) {  // last community absorbs the remainder
    return c == cfg.communities - 1 ? cfg.entities : (c + 1) * per_comm;
  };

  std::mt19937_64 rng(cfg.seed);

  // Graph: ring per community (guarantees intra connectivity) plus random
  // chords, then one bridge between consecutive communities.
  std::set<std::pair<int, int>> edges;
  auto put_edge = [&](int u, int v) {
    if (u == v) return;
    edges.emplace(std::min(u, v), std::max(u, v));
  };
  for (int c = 0; c < cfg.communities; ++c) {
    const int lo = comm_begin(c), hi = comm_end(c);
    for (int i = lo; i < hi; ++i) put_edge(i, i + 1 == hi ? lo : i + 1);
    std::uniform_int_distribution<int> pick(lo, hi - 1);
    for (int i = lo; i < hi; ++i)
      for (int e = 0; e < kExtraEdgesPerNode; ++e) put_edge(i, pick(rng));
  }
  std::vector<std::pair<int, int>> bridges;
  for (int c = 0; c + 1 < cfg.communities; ++c) {
    const int u = comm_end(c) - 1, v = comm_begin(c + 1);
    put_edge(u, v);
    bridges.emplace_back(u, v);
  }

  SynthPaths out;
  out.triples = (std::filesystem::path(cfg.out_dir) / "triples.tsv").string();
  out.embeddings = (std::filesystem::path(cfg.out_dir) / "embeddings.txt").string();
  out.posts = (std::filesystem::path(cfg.out_dir) / "posts.jsonl").string();

  {
    std::ofstream tf(out.triples);
    if (!tf) throw std::runtime_error("synth: cannot write " + out.triples);
    const std::set<std::pair<int, int>> bridge_set(bridges.begin(), bridges.end());
    for (const auto& [u, v] : edges) {
      const char* rel = bridge_set.count({u, v}) ? "bridges_to" : "related_to";
      tf << entity_name(u) << '\t' << rel << '\t' << entity_name(v) << '\n';
    }
  }

  {
    std::vector<std::vector<double>> centroids(cfg.communities,
                                               std::vector<double>(kEmbeddingDim));
    std::normal_distribution<double> unit(0.0, 1.0);
    for (auto& c : centroids)
      for (double& v : c) v = kCentroidScale * unit(rng);
    std::ofstream ef(out.embeddings);
    if (!ef) throw std::runtime_error("synth: cannot write " + out.embeddings);
    ef << cfg.entities << ' ' << kEmbeddingDim << '\n';
    ef.precision(17);
    for (int id = 0; id < cfg.entities; ++id) {
      ef << entity_name(id);
      const auto& c = centroids[community_of(id)];
      for (int j = 0; j < kEmbeddingDim; ++j) ef << ' ' << c[j] + kEntityJitter * unit(rng);
      ef << '\n';
    }
  }

  {
    std::ofstream pf(out.posts);
    if (!pf) throw std::runtime_error("synth: cannot write " + out.posts);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> comm_pick(0, cfg.communities - 1);
    std::uniform_int_distribution<int> count_pick(2, 4);

    auto sample_from = [&](int c, int n) {
      std::uniform_int_distribution<int> pick(comm_begin(c), comm_end(c) - 1);
      std::set<int> chosen;
      while (static_cast<int>(chosen.size()) < n) chosen.insert(pick(rng));
      return std::vector<int>(chosen.begin(), chosen.end());
    };

    for (int i = 0; i < cfg.posts; ++i) {
      const int label = i % 2;  // alternating keeps counts balanced within 1
      // At most one signal goes neutral on a post, so every post is
      // resolvable by the other one and only the pair separates everything.
      const double u = coin(rng);
      const bool entity_neutral = u < kEntityNeutral;
      const bool feature_neutral = !entity_neutral && u < kEntityNeutral + kFeatureNeutral;

      std::vector<int> text_ids, visual_ids;
      const int n_text = count_pick(rng), n_visual = count_pick(rng);
      int c1 = comm_pick(rng), c2 = comm_pick(rng);
      while (c2 == c1) c2 = comm_pick(rng);
      // Splitting a modality across both communities guarantees cross pairs
      // in each of its pair sets.
      const auto split = [&](int n) {
        auto a = sample_from(c1, (n + 1) / 2);
        auto b = sample_from(c2, n / 2);
        a.insert(a.end(), b.begin(), b.end());
        return a;
      };
      if (entity_neutral) {
        // third layout, equally likely under both labels: mixed text over a
        // single-community image
        text_ids = split(n_text);
        visual_ids = sample_from(c1, n_visual);
      } else if (label == 0) {
        text_ids = split(n_text);
        visual_ids = split(n_visual);
      } else {
        text_ids = sample_from(c1, n_text);
        visual_ids = sample_from(c1, n_visual);
      }

      nlohmann::json j;
      j["id"] = "post_" + std::to_string(i);
      j["label"] = label;
      nlohmann::json te = nlohmann::json::array(), ve = nlohmann::json::array();
      for (int id : text_ids) te.push_back(entity_name(id));
      for (int id : visual_ids) ve.push_back(entity_name(id));
      j["text_entities"] = std::move(te);
      j["visual_entities"] = std::move(ve);
      std::uint64_t fs = rng();
      while (feature_seed_is_neutral(fs) != feature_neutral) fs = rng();
      j["feature_seed"] = fs;
      pf << j.dump() << '\n';
    }
  }

  return out;
}

}  // namespace pipeline
}  // namespace kgrumor
