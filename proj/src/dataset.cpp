#include "kgrumor/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace kgrumor {
namespace pipeline {

namespace {

constexpr double kFeatureNoise = 0.2;
// Fraction of posts whose modalities are unrelated at the feature level. Such
// posts carry no feature evidence either way, so the feature signal alone
// cannot label everything.
constexpr double kFeatureNeutral = 0.15;

std::vector<std::vector<double>> noisy_rows(const std::vector<double>& latent, int rows,
                                            std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, kFeatureNoise);
  std::vector<std::vector<double>> out(rows, std::vector<double>(latent.size()));
  for (int i = 0; i < rows; ++i)
    for (size_t j = 0; j < latent.size(); ++j) out[i][j] = latent[j] + noise(rng);
  return out;
}

}  // namespace

void expand_features(std::uint64_t feature_seed, int label,
                     std::vector<std::vector<double>>& text_features,
                     std::vector<std::vector<double>>& visual_features) {
  std::mt19937_64 rng(feature_seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> unit(0.0, 1.0);
  const bool neutral = coin(rng) < kFeatureNeutral;  // first draw, see feature_seed_is_neutral
  std::vector<double> latent_t(kSynthFeatureDim), independent(kSynthFeatureDim);
  for (double& v : latent_t) v = unit(rng);
  for (double& v : independent) v = unit(rng);

  // Non-rumor posts repeat the text latent in the visual stream, rumor posts
  // negate it; neutral posts use an unrelated latent.
  std::vector<double> latent_v;
  if (neutral) {
    latent_v = independent;
  } else {
    latent_v = latent_t;
    if (label == 0)
      for (double& v : latent_v) v = -v;
  }
  text_features = noisy_rows(latent_t, kSynthTextRows, rng);
  visual_features = noisy_rows(latent_v, kVisualRows, rng);
}

bool feature_seed_is_neutral(std::uint64_t feature_seed) {
  std::mt19937_64 rng(feature_seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  return coin(rng) < kFeatureNeutral;
}

Dataset load_posts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset: cannot open " + path);
  Dataset ds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset: bad JSON at line " + std::to_string(line_no));
    }
    Post p;
    try {
      p.id = j.at("id").get<std::string>();
      p.label = j.at("label").get<int>();
      p.text_entities = j.at("text_entities").get<std::vector<std::string>>();
      p.visual_entities = j.at("visual_entities").get<std::vector<std::string>>();
      if (j.contains("feature_seed")) {
        expand_features(j.at("feature_seed").get<std::uint64_t>(), p.label, p.text_features,
                        p.visual_features);
      } else {
        p.text_features = j.at("text_features").get<std::vector<std::vector<double>>>();
        p.visual_features = j.at("visual_features").get<std::vector<std::vector<double>>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("dataset: missing or mistyped field at line " +
                               std::to_string(line_no));
    }
    if (p.label != 0 && p.label != 1)
      throw std::runtime_error("dataset: label must be 0 or 1 for post " + p.id);
    if (p.text_features.empty() || static_cast<int>(p.text_features.size()) > kMaxTextRows)
      throw std::runtime_error("dataset: text feature rows out of range for post " + p.id);
    if (static_cast<int>(p.visual_features.size()) != kVisualRows)
      throw std::runtime_error("dataset: visual features must have 49 rows for post " + p.id);
    const int width = static_cast<int>(p.text_features[0].size());
    auto check_rect = [&](const std::vector<std::vector<double>>& rows) {
      for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != width)
          throw std::runtime_error("dataset: ragged feature rows for post " + p.id);
        for (double v : r)
          if (!std::isfinite(v))
            throw std::runtime_error("dataset: non-finite feature for post " + p.id);
      }
    };
    check_rect(p.text_features);
    check_rect(p.visual_features);
    if (ds.d_raw == 0) ds.d_raw = width;
    else if (width != ds.d_raw)
      throw std::runtime_error("dataset: feature width changed at post " + p.id);
    ds.posts.push_back(std::move(p));
  }
  if (ds.posts.empty()) throw std::runtime_error("dataset: no posts in " + path);
  return ds;
}

std::vector<kg::EntityId> resolve_entities(const std::vector<std::string>& names,
                                           const kg::KnowledgeGraph& graph,
                                           const kg::EmbeddingTable& emb, int* dropped) {
  std::vector<kg::EntityId> ids;
  for (const auto& n : names) {
    const auto id = graph.find(n);
    if (!id || !emb.has(*id)) {
      if (dropped) ++*dropped;
      continue;
    }
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace pipeline
}  // namespace kgrumor
