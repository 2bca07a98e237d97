#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgrumor/gradcheck.hpp"
#include "kgrumor/synth.hpp"

namespace {

using namespace kgrumor;
using pipeline::RunConfig;

struct LoadedRun {
  kg::LoadedGraph kg;
  pipeline::Dataset dataset;
  std::vector<pipeline::PostContext> contexts;
  double d_max = 0.0;
  int dropped_entities = 0;
};

LoadedRun load_run(const RunConfig& cfg) {
  LoadedRun run;
  run.kg = kg::load_graph(cfg.triples_path, cfg.embeddings_path);
  std::cerr << "kg: " << run.kg.report.entities << " entities, " << run.kg.report.edges
            << " edges";
  if (!run.kg.report.missing_embeddings.empty())
    std::cerr << ", " << run.kg.report.missing_embeddings.size() << " without embeddings";
  std::cerr << "\n";
  if (run.kg.embeddings.dim() != cfg.d_e)
    throw std::runtime_error("run: embedding dimension " + std::to_string(run.kg.embeddings.dim()) +
                             " does not match configured d_e");

  run.dataset = pipeline::load_posts(cfg.posts_path);
  run.d_max = cfg.disable_path
                  ? 0.0
                  : paths::estimate_d_max(run.kg.graph, run.kg.embeddings, cfg.alpha, cfg.hop_cap);
  paths::PairCache cache;
  for (const auto& post : run.dataset.posts)
    run.contexts.push_back(pipeline::make_context(post, run.kg.graph, run.kg.embeddings, cfg,
                                                  run.d_max, cache, &run.dropped_entities));
  if (run.dropped_entities > 0)
    std::cerr << "warning: dropped " << run.dropped_entities
              << " unresolvable or embedding-less entity mentions\n";
  return run;
}

void dump_pair_sets(const LoadedRun& run, const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump: cannot write " + path);
  auto pair_array = [&](const std::vector<paths::PairCorrelation>& pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pairs) {
      arr.push_back({{"u", run.kg.graph.name(p.u)},
                     {"v", run.kg.graph.name(p.v)},
                     {"connected", p.connected},
                     {"hops", p.hops},
                     {"d_s", p.d_s}});
    }
    return arr;
  };
  auto subset = [](const std::vector<paths::PairCorrelation>& pairs,
                   const std::vector<int>& indices) {
    std::vector<paths::PairCorrelation> out;
    for (int i : indices) out.push_back(pairs[i]);
    return out;
  };
  auto set_json = [&](const std::vector<paths::PairCorrelation>& pairs) {
    nlohmann::json js;
    js["pairs"] = pair_array(pairs);
    if (!pairs.empty()) {
      const auto sel = kec::select_topk(pairs, cfg.k);
      js["relevant"] = pair_array(subset(pairs, sel.relevant));
      js["irrelevant"] = pair_array(subset(pairs, sel.irrelevant));
    } else {
      js["relevant"] = nlohmann::json::array();
      js["irrelevant"] = nlohmann::json::array();
    }
    return js;
  };
  for (const auto& ctx : run.contexts) {
    nlohmann::json j;
    j["post_id"] = ctx.id;
    j["tt"] = set_json(ctx.tt);
    j["vv"] = set_json(ctx.vv);
    j["tv"] = set_json(ctx.tv);
    out << j.dump() << '\n';
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << '\n';
}

int cmd_synth(const pipeline::SynthConfig& scfg) {
  const auto paths = pipeline::generate_synthetic(scfg);
  std::cerr << "wrote " << paths.triples << ", " << paths.embeddings << ", " << paths.posts
            << "\n";
  return 0;
}

int cmd_train(RunConfig cfg, const std::string& model_out, const std::string& metrics_out,
              const std::string& dump_pairs) {
  cfg.validate();
  LoadedRun run = load_run(cfg);
  if (!dump_pairs.empty()) dump_pair_sets(run, cfg, dump_pairs);

  auto split = pipeline::split_indices(static_cast<int>(run.contexts.size()), cfg.seed);
  auto params = pipeline::ModelParameters::init(cfg, run.dataset.d_raw, cfg.seed);
  std::cerr << "training on " << split.train.size() << " posts, validating on "
            << split.val.size() << ", testing on " << split.test.size() << "\n";
  auto result = pipeline::train(run.contexts, params, cfg, split);
  for (size_t e = 0; e < result.epoch_loss.size(); ++e)
    std::cerr << "epoch " << e + 1 << ": loss " << result.epoch_loss[e] << "\n";

  const std::string metrics =
      pipeline::metrics_to_json(result.test_metrics, result.epoch_loss, cfg, run.d_max,
                                run.dataset.d_raw);
  if (!model_out.empty()) pipeline::save_model(params, cfg, run.d_max, model_out);
  if (!metrics_out.empty()) write_text(metrics_out, metrics);
  std::cout << metrics << std::endl;
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& posts_override,
             const std::string& split_name, const std::string& metrics_out) {
  auto lm = pipeline::load_model(model_path);
  RunConfig cfg = lm.config;
  if (!posts_override.empty()) cfg.posts_path = posts_override;
  LoadedRun run = load_run(cfg);

  std::vector<int> indices;
  if (split_name == "all") {
    indices.resize(run.contexts.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
  } else {
    auto split = pipeline::split_indices(static_cast<int>(run.contexts.size()), cfg.seed);
    if (split_name == "train") indices = split.train;
    else if (split_name == "val") indices = split.val;
    else if (split_name == "test") indices = split.test;
    else throw std::runtime_error("eval: unknown split '" + split_name + "'");
  }

  const auto metrics = pipeline::evaluate(run.contexts, lm.params, cfg, indices);
  const std::string text =
      pipeline::metrics_to_json(metrics, {}, cfg, run.d_max, run.dataset.d_raw);
  if (!metrics_out.empty()) write_text(metrics_out, text);
  std::cout << text << std::endl;
  return 0;
}

int cmd_paths(const std::string& triples, const std::string& embeddings, const std::string& u,
              const std::string& v, double alpha, int hop_cap) {
  auto loaded = kg::load_graph(triples, embeddings);
  const auto iu = loaded.graph.find(u), iv = loaded.graph.find(v);
  if (!iu) throw std::runtime_error("paths: unknown entity '" + u + "'");
  if (!iv) throw std::runtime_error("paths: unknown entity '" + v + "'");

  const double d_max =
      paths::estimate_d_max(loaded.graph, loaded.embeddings, alpha, hop_cap);
  const auto corr = paths::semantic_distance(loaded.graph, loaded.embeddings, *iu, *iv, alpha,
                                             hop_cap, d_max);
  if (!corr.connected) {
    std::cout << "no path within " << hop_cap << " hops; D_s = d_max = " << d_max << "\n";
    return 0;
  }
  const auto path = paths::shortest_path(loaded.graph, *iu, *iv, hop_cap);
  std::cout << "path (" << corr.hops << " hops):";
  for (auto id : path.nodes) std::cout << ' ' << loaded.graph.name(id);
  std::cout << "\nhead weights:";
  for (double w : paths::path_weights(corr.hops, alpha, false)) std::cout << ' ' << w;
  std::cout << "\ntail weights:";
  for (double w : paths::path_weights(corr.hops, alpha, true)) std::cout << ' ' << w;
  std::cout << "\nD_s = " << corr.d_s << "\n";
  return 0;
}

int cmd_gradcheck(const std::vector<std::string>& overrides) {
  RunConfig cfg = pipeline::gradcheck_config();
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("gradcheck: --set expects key=value");
    pipeline::apply_config_value(kv.substr(0, eq), kv.substr(eq + 1), cfg);
  }
  cfg.validate();
  const auto report = pipeline::grad_check(cfg);
  std::cout << report.to_json() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-enhanced multi-modal rumor detection head"};
  app.require_subcommand(1);

  pipeline::SynthConfig scfg;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", scfg.out_dir, "output directory")->required();
  synth->add_option("--entities", scfg.entities, "entity count");
  synth->add_option("--communities", scfg.communities, "community count");
  synth->add_option("--posts", scfg.posts, "post count");
  synth->add_option("--seed", scfg.seed, "generator seed");

  std::string config_path, model_out, metrics_out, dump_pairs;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "train the detection head");
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--set", overrides, "override one config key (key=value, repeatable)");
  train->add_option("--model-out", model_out, "write trained model JSON here");
  train->add_option("--metrics-out", metrics_out, "write metrics JSON here");
  train->add_option("--dump-pairs", dump_pairs, "write per-post pair sets as JSON lines");

  std::string model_path, posts_override, split_name = "test";
  auto* eval = app.add_subcommand("eval", "evaluate a trained model");
  eval->add_option("--model", model_path, "model JSON from train")->required();
  eval->add_option("--posts", posts_override, "evaluate on this posts file");
  eval->add_option("--split", split_name, "train|val|test|all (default test)");
  eval->add_option("--metrics-out", metrics_out, "write metrics JSON here");

  std::string p_triples, p_embeddings, p_u, p_v;
  double p_alpha = 0.9;
  int p_hop_cap = 5;
  auto* pathsc = app.add_subcommand("paths", "inspect the path between two entities");
  pathsc->add_option("--triples", p_triples, "triples file")->required();
  pathsc->add_option("--embeddings", p_embeddings, "embeddings file")->required();
  pathsc->add_option("u", p_u, "first entity name")->required();
  pathsc->add_option("v", p_v, "second entity name")->required();
  pathsc->add_option("--alpha", p_alpha, "path weight decay");
  pathsc->add_option("--hop-cap", p_hop_cap, "maximum hops");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  gradcheck->add_option("--set", overrides, "override one config key (key=value, repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(scfg);
    if (train->parsed()) {
      RunConfig cfg;
      if (!config_path.empty()) pipeline::apply_config_file(config_path, cfg);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("train: --set expects key=value");
        pipeline::apply_config_value(kv.substr(0, eq), kv.substr(eq + 1), cfg);
      }
      return cmd_train(cfg, model_out, metrics_out, dump_pairs);
    }
    if (eval->parsed()) return cmd_eval(model_path, posts_override, split_name, metrics_out);
    if (pathsc->parsed()) return cmd_paths(p_triples, p_embeddings, p_u, p_v, p_alpha, p_hop_cap);
    if (gradcheck->parsed()) return cmd_gradcheck(overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
