#include "kgrumor/gradcheck.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

namespace kgrumor {
namespace pipeline {

using namespace nn;

RunConfig gradcheck_config() {
  RunConfig cfg;
  cfg.d = 8;
  cfg.d_e = 6;
  cfg.dictionary_size = 4;
  cfg.k = 2;
  cfg.heads = 2;
  cfg.hop_cap = 5;
  cfg.seed = 7;
  return cfg;
}

namespace {

struct Fixture {
  kg::KnowledgeGraph graph;
  kg::EmbeddingTable emb;
  Post post;
};

// Six entities on a line with one chord; paths between the post's entities
// span one to three hops.
Fixture build_fixture(const RunConfig& cfg) {
  Fixture f;
  for (int i = 0; i < 6; ++i) f.graph.add_entity("n" + std::to_string(i));
  const int edges[][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}};
  for (const auto& e : edges) f.graph.add_edge(e[0], e[1], "related_to");
  f.graph.finalize();

  std::mt19937_64 rng(cfg.seed * 977 + 1);
  std::normal_distribution<double> unit(0.0, 1.0);
  f.emb = kg::EmbeddingTable(6, cfg.d_e);
  for (int i = 0; i < 6; ++i) {
    std::vector<double> row(cfg.d_e);
    for (double& v : row) v = unit(rng);
    f.emb.set(i, row);
  }

  f.post.id = "fixture_post";
  f.post.label = 0;
  f.post.text_entities = {"n0", "n2"};
  f.post.visual_entities = {"n3", "n5"};
  const int d_raw = 5;
  auto rows = [&](int n) {
    std::vector<std::vector<double>> rs(n, std::vector<double>(d_raw));
    for (auto& r : rs)
      for (double& v : r) v = unit(rng);
    return rs;
  };
  f.post.text_features = rows(3);
  f.post.visual_features = rows(kVisualRows);
  return f;
}

}  // namespace

GradCheckReport grad_check(const RunConfig& cfg, double step) {
  Fixture fix = build_fixture(cfg);
  paths::PairCache cache;
  const double d_max =
      paths::estimate_d_max(fix.graph, fix.emb, cfg.alpha, cfg.hop_cap, 200);
  int dropped = 0;
  PostContext ctx = make_context(fix.post, fix.graph, fix.emb, cfg, d_max, cache, &dropped);
  if (dropped != 0) throw std::runtime_error("gradcheck: fixture entity resolution failed");

  ModelParameters params =
      ModelParameters::init(cfg, static_cast<int>(fix.post.text_features[0].size()), cfg.seed);

  auto loss_value = [&]() {
    NoGradGuard no_grad;
    Tensor prob = forward_post(ctx, params, cfg);
    return bce_loss(prob, ctx.target).item();
  };

  // One reverse pass for the analytic gradients.
  for (Tensor* t : params.all()) t->zero_grad();
  backward(bce_loss(forward_post(ctx, params, cfg), ctx.target));

  GradCheckReport report;
  report.step = step;
  for (auto& [name, t] : params.named()) {
    GradCheckGroup group;
    group.name = name;
    group.coordinates = t->numel();
    for (int i = 0; i < t->numel(); ++i) {
      const double ad = t->grad()[i];
      group.max_abs_grad = std::max(group.max_abs_grad, std::abs(ad));
      const double saved = t->data()[i];
      t->data()[i] = saved + step;
      const double up = loss_value();
      t->data()[i] = saved - step;
      const double down = loss_value();
      t->data()[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double rel = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1.0});
      group.max_rel_error = std::max(group.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(std::move(group));
  }
  return report;
}

std::string GradCheckReport::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["max_rel_error"] = max_rel_error;
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : groups) {
    gs.push_back({{"group", g.name},
                  {"coordinates", g.coordinates},
                  {"max_rel_error", g.max_rel_error},
                  {"max_abs_grad", g.max_abs_grad}});
  }
  j["groups"] = std::move(gs);
  return j.dump(2);
}

}  // namespace pipeline
}  // namespace kgrumor
