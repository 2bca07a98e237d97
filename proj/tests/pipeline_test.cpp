#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "kgrumor/gradcheck.hpp"
#include "kgrumor/synth.hpp"
#include "kgrumor/trainer.hpp"
#include "testutil.hpp"

using namespace kgrumor;
using namespace kgrumor::pipeline;
using nn::Tensor;

TEST_CASE("config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  RunConfig bad = cfg;
  bad.heads = 5;  // 64 % 5 != 0
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.alpha = 1.0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.lr = -1e-4;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.lr = 0.0;
  CHECK_NOTHROW(bad.validate());
  bad = cfg;
  bad.k = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("config values parse by key") {
  RunConfig cfg;
  apply_config_value("M", "32", cfg);
  CHECK(cfg.dictionary_size == 32);
  apply_config_value("alpha", "0.5", cfg);
  CHECK(cfg.alpha == 0.5);
  apply_config_value("disable_kec", "true", cfg);
  CHECK(cfg.disable_kec);
  apply_config_value("disable_kec", "0", cfg);
  CHECK_FALSE(cfg.disable_kec);
  apply_config_value("posts_path", "some/file.jsonl", cfg);
  CHECK(cfg.posts_path == "some/file.jsonl");

  CHECK_THROWS_WITH_AS(apply_config_value("dd", "1", cfg), doctest::Contains("unknown key"),
                       std::runtime_error);
  CHECK_THROWS(apply_config_value("d", "sixty", cfg));
  CHECK_THROWS(apply_config_value("disable_kec", "maybe", cfg));
}

TEST_CASE("config files override defaults line by line") {
  testutil::TempDir dir;
  const auto path = dir.file("run.conf");
  testutil::write_file(path,
                       "# comment\n"
                       "d = 16\n"
                       "  heads=2  \n"
                       "\n"
                       "lr = 0.001\n");
  RunConfig cfg;
  apply_config_file(path, cfg);
  CHECK(cfg.d == 16);
  CHECK(cfg.heads == 2);
  CHECK(cfg.lr == 0.001);
  CHECK(cfg.batch == 16);  // untouched default

  testutil::write_file(path, "d 16\n");
  RunConfig cfg2;
  CHECK_THROWS_WITH_AS(apply_config_file(path, cfg2), doctest::Contains("line 1"),
                       std::runtime_error);
}

TEST_CASE("posts loading validates structure") {
  testutil::TempDir dir;
  const auto path = dir.file("posts.jsonl");
  auto visual_rows = [] {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < kVisualRows; ++i) rows.push_back({0.5, 1.0});
    return rows;
  };

  SUBCASE("accepts explicit features") {
    nlohmann::json j;
    j["id"] = "p1";
    j["label"] = 1;
    j["text_entities"] = {"a", "b"};
    j["visual_entities"] = {"c"};
    j["text_features"] = {{1.0, 2.0}, {3.0, 4.0}};
    j["visual_features"] = visual_rows();
    testutil::write_file(path, j.dump() + "\n");
    auto ds = load_posts(path);
    REQUIRE(ds.posts.size() == 1);
    CHECK(ds.d_raw == 2);
    CHECK(ds.posts[0].label == 1);
    CHECK(ds.posts[0].rumor_target() == 0.0);
    CHECK(ds.posts[0].text_features.size() == 2);
    CHECK(ds.posts[0].visual_features.size() == kVisualRows);
  }

  SUBCASE("rejects bad labels, shapes and mixed widths") {
    nlohmann::json j;
    j["id"] = "p1";
    j["label"] = 2;
    j["text_entities"] = nlohmann::json::array();
    j["visual_entities"] = nlohmann::json::array();
    j["text_features"] = {{1.0, 2.0}};
    j["visual_features"] = visual_rows();
    testutil::write_file(path, j.dump() + "\n");
    CHECK_THROWS(load_posts(path));

    j["label"] = 0;
    j["visual_features"] = {{1.0, 2.0}};  // wrong row count
    testutil::write_file(path, j.dump() + "\n");
    CHECK_THROWS(load_posts(path));

    j["visual_features"] = visual_rows();
    j["text_features"] = {{1.0, 2.0}, {3.0}};  // ragged
    testutil::write_file(path, j.dump() + "\n");
    CHECK_THROWS(load_posts(path));

    // two posts with different widths
    nlohmann::json a;
    a["id"] = "a";
    a["label"] = 0;
    a["text_entities"] = nlohmann::json::array();
    a["visual_entities"] = nlohmann::json::array();
    a["feature_seed"] = 1;
    nlohmann::json b = a;
    b["id"] = "b";
    b.erase("feature_seed");
    b["text_features"] = {{1.0, 2.0}};
    nlohmann::json brows = nlohmann::json::array();
    for (int i = 0; i < kVisualRows; ++i) brows.push_back({0.0, 0.0});
    b["visual_features"] = brows;
    testutil::write_file(path, a.dump() + "\n" + b.dump() + "\n");
    CHECK_THROWS(load_posts(path));
  }

  SUBCASE("bad json names the line") {
    testutil::write_file(path, "{not json}\n");
    CHECK_THROWS_WITH_AS(load_posts(path), doctest::Contains("line 1"), std::runtime_error);
  }
}

TEST_CASE("feature seeds expand deterministically and differ by label") {
  int label_sensitive = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<std::vector<double>> t1, v1, t2, v2, t3, v3;
    expand_features(seed, 0, t1, v1);
    expand_features(seed, 0, t2, v2);
    expand_features(seed, 1, t3, v3);
    CHECK(t1.size() == kSynthTextRows);
    CHECK(t1[0].size() == kSynthFeatureDim);
    CHECK(v1.size() == kVisualRows);
    CHECK(t1 == t2);
    CHECK(v1 == v2);
    // the label drives the cross-modal relation, not the text stream itself
    CHECK(t1 == t3);
    // neutral seeds are exactly the label-insensitive ones
    CHECK((v1 != v3) == !feature_seed_is_neutral(seed));
    if (v1 != v3) ++label_sensitive;
  }
  CHECK(label_sensitive >= 7);
}

TEST_CASE("entity names resolve to sorted unique ids with embeddings") {
  kg::KnowledgeGraph g;
  auto a = g.add_entity("a");
  auto b = g.add_entity("b");
  g.add_entity("noemb");
  g.add_edge(a, b, "r");
  g.finalize();
  kg::EmbeddingTable emb(3, 2);
  emb.set(a, {1.0, 2.0});
  emb.set(b, {3.0, 4.0});

  int dropped = 0;
  auto ids = resolve_entities({"b", "missing", "a", "b", "noemb"}, g, emb, &dropped);
  CHECK(ids == std::vector<kg::EntityId>{a, b});
  CHECK(dropped == 2);
}

TEST_CASE("metric arithmetic") {
  std::vector<double> probs, targets;
  auto push = [&](int count, double p, double t) {
    for (int i = 0; i < count; ++i) {
      probs.push_back(p);
      targets.push_back(t);
    }
  };
  push(8, 0.9, 1.0);  // tp
  push(2, 0.9, 0.0);  // fp
  push(2, 0.1, 1.0);  // fn
  push(8, 0.1, 0.0);  // tn
  auto m = compute_metrics(probs, targets);
  CHECK(m.tp == 8);
  CHECK(m.fp == 2);
  CHECK(m.fn == 2);
  CHECK(m.tn == 8);
  CHECK(m.accuracy == doctest::Approx(0.8));
  CHECK(m.precision == doctest::Approx(0.8));
  CHECK(m.recall == doctest::Approx(0.8));
  CHECK(m.f1 == doctest::Approx(0.8));

  auto empty = compute_metrics({}, {});
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.f1 == 0.0);
}

TEST_CASE("dataset split is seeded and partitioned 70/10/20") {
  auto s = split_indices(400, 42);
  CHECK(s.train.size() == 280);
  CHECK(s.val.size() == 40);
  CHECK(s.test.size() == 80);

  std::vector<bool> seen(400, false);
  for (auto part : {&s.train, &s.val, &s.test})
    for (int i : *part) {
      CHECK_FALSE(seen[i]);
      seen[i] = true;
    }
  CHECK(std::count(seen.begin(), seen.end(), true) == 400);

  auto again = split_indices(400, 42);
  CHECK(again.train == s.train);
  auto other = split_indices(400, 43);
  CHECK(other.train != s.train);
}

TEST_CASE("parameter initialization is seed-deterministic and shaped") {
  RunConfig cfg = gradcheck_config();
  auto p1 = ModelParameters::init(cfg, 5, 7);
  auto p2 = ModelParameters::init(cfg, 5, 7);
  auto p3 = ModelParameters::init(cfg, 5, 8);

  auto n1 = p1.named(), n2 = p2.named(), n3 = p3.named();
  REQUIRE(n1.size() == n2.size());
  bool any_differs = false;
  for (size_t i = 0; i < n1.size(); ++i) {
    CHECK(n1[i].first == n2[i].first);
    CHECK(n1[i].second->data() == n2[i].second->data());
    if (n1[i].second->data() != n3[i].second->data()) any_differs = true;
  }
  CHECK(any_differs);

  CHECK(p1.classifier_w.rows() == 18 * cfg.d);
  CHECK(p1.kec_projection.rows() == 2 * cfg.d_e);
  CHECK(p1.kec_projection.cols() == 2 * cfg.d);
  CHECK(p1.dictionary.rows() == cfg.dictionary_size);

  // ablation flags never change the parameter draw
  RunConfig ablated = cfg;
  ablated.disable_kec = true;
  ablated.disable_bsc = true;
  auto p4 = ModelParameters::init(ablated, 5, 7);
  CHECK(p4.classifier_w.data() == p1.classifier_w.data());
}

TEST_CASE("synthetic pipeline end to end") {
  testutil::TempDir dir;
  SynthConfig scfg;
  scfg.entities = 16;
  scfg.communities = 2;
  scfg.posts = 24;
  scfg.seed = 5;
  scfg.out_dir = dir.file("data");
  auto files = generate_synthetic(scfg);

  RunConfig cfg;
  cfg.triples_path = files.triples;
  cfg.embeddings_path = files.embeddings;
  cfg.posts_path = files.posts;
  cfg.d = 8;
  cfg.heads = 2;
  cfg.dictionary_size = 4;
  cfg.k = 2;
  cfg.epochs = 3;
  cfg.batch = 4;
  cfg.lr = 5e-3;
  cfg.seed = 11;
  cfg.validate();

  auto loaded = kg::load_graph(cfg.triples_path, cfg.embeddings_path);
  auto ds = load_posts(cfg.posts_path);
  REQUIRE(ds.posts.size() == 24);
  const double d_max =
      paths::estimate_d_max(loaded.graph, loaded.embeddings, cfg.alpha, cfg.hop_cap);
  REQUIRE(d_max > 0.0);

  paths::PairCache cache;
  std::vector<PostContext> contexts;
  int dropped = 0;
  for (const auto& post : ds.posts)
    contexts.push_back(
        make_context(post, loaded.graph, loaded.embeddings, cfg, d_max, cache, &dropped));
  CHECK(dropped == 0);

  auto split = split_indices(static_cast<int>(contexts.size()), cfg.seed);

  SUBCASE("forward yields probabilities") {
    auto params = ModelParameters::init(cfg, ds.d_raw, cfg.seed);
    nn::NoGradGuard guard;
    for (const auto& ctx : contexts) {
      const double p = forward_post(ctx, params, cfg).item();
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }

  SUBCASE("training reduces the mean loss") {
    auto params = ModelParameters::init(cfg, ds.d_raw, cfg.seed);
    auto result = train(contexts, params, cfg, split);
    REQUIRE(result.epoch_loss.size() == 3);
    CHECK(result.epoch_loss.back() < result.epoch_loss.front());
  }

  SUBCASE("zero learning rate moves nothing") {
    RunConfig frozen = cfg;
    frozen.lr = 0.0;
    frozen.epochs = 1;
    auto params = ModelParameters::init(frozen, ds.d_raw, frozen.seed);
    auto before = params.dictionary.data();
    auto cls_before = params.classifier_w.data();
    train(contexts, params, frozen, split);
    CHECK(params.dictionary.data() == before);
    CHECK(params.classifier_w.data() == cls_before);
  }

  SUBCASE("identical runs produce identical metrics json") {
    auto run = [&] {
      paths::PairCache fresh;
      std::vector<PostContext> ctxs;
      int drop = 0;
      for (const auto& post : ds.posts)
        ctxs.push_back(
            make_context(post, loaded.graph, loaded.embeddings, cfg, d_max, fresh, &drop));
      auto params = ModelParameters::init(cfg, ds.d_raw, cfg.seed);
      auto result = train(ctxs, params, cfg, split);
      return metrics_to_json(result.test_metrics, result.epoch_loss, cfg, d_max, ds.d_raw);
    };
    CHECK(run() == run());
  }

  SUBCASE("model json round trips") {
    auto params = ModelParameters::init(cfg, ds.d_raw, cfg.seed);
    const auto path = dir.file("model.json");
    save_model(params, cfg, d_max, path);
    auto lm = load_model(path);
    CHECK(lm.d_max == d_max);
    CHECK(lm.config.d == cfg.d);
    auto n1 = params.named(), n2 = lm.params.named();
    for (size_t i = 0; i < n1.size(); ++i) CHECK(n1[i].second->data() == n2[i].second->data());

    nn::NoGradGuard guard;
    const double p1 = forward_post(contexts[0], params, cfg).item();
    const double p2 = forward_post(contexts[0], lm.params, lm.config).item();
    CHECK(p1 == p2);
  }

  SUBCASE("ablation flags cut their branches") {
    auto params = ModelParameters::init(cfg, ds.d_raw, cfg.seed);
    nn::NoGradGuard guard;

    // with the semantic branch off, features stop mattering
    RunConfig no_bsc = cfg;
    no_bsc.disable_bsc = true;
    PostContext altered = contexts[0];
    altered.text_raw = nn::scale(altered.text_raw, 3.0);
    CHECK(forward_post(contexts[0], params, no_bsc).item() ==
          forward_post(altered, params, no_bsc).item());
    CHECK(forward_post(contexts[0], params, cfg).item() !=
          forward_post(altered, params, cfg).item());

    // with the entity branch off, pair sets stop mattering
    RunConfig no_kec = cfg;
    no_kec.disable_kec = true;
    PostContext no_pairs = contexts[0];
    no_pairs.tt.clear();
    no_pairs.vv.clear();
    no_pairs.tv.clear();
    CHECK(forward_post(contexts[0], params, no_kec).item() ==
          forward_post(no_pairs, params, no_kec).item());
  }
}

TEST_CASE("gradient audit fixture") {
  RunConfig cfg = gradcheck_config();

  SUBCASE("disabled entity branch keeps its projection gradient at zero") {
    RunConfig ablated = cfg;
    ablated.disable_kec = true;
    auto report = grad_check(ablated, 1e-5);
    CHECK(report.max_rel_error < 1e-4);
    bool found = false;
    for (const auto& g : report.groups) {
      if (g.name == "kec_projection.w") {
        found = true;
        CHECK(g.max_abs_grad == 0.0);
      }
    }
    CHECK(found);
  }
}
