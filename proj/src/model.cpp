#include "kgrumor/model.hpp"

#include <fstream>

#include "json.hpp"

namespace kgrumor {
namespace pipeline {

using namespace nn;

ModelParameters ModelParameters::init(const RunConfig& cfg, int d_raw, std::uint64_t seed) {
  if (d_raw < 1) throw std::runtime_error("model: feature width must be positive");
  std::mt19937_64 rng(seed);
  ModelParameters p;
  p.d = cfg.d;
  p.d_e = cfg.d_e;
  p.d_raw = d_raw;
  p.text_adapter_w = glorot(d_raw, cfg.d, rng);
  p.text_adapter_b = Tensor::zeros(1, cfg.d, true);
  p.visual_adapter_w = glorot(d_raw, cfg.d, rng);
  p.visual_adapter_b = Tensor::zeros(1, cfg.d, true);
  p.dictionary = glorot(cfg.dictionary_size, cfg.d, rng);
  p.alignment = TransformerLayer::create(cfg.d, cfg.heads, rng);
  p.agg_w = glorot(cfg.d, cfg.d, rng);
  p.agg_b = Tensor::zeros(1, cfg.d, true);
  p.kec_projection = glorot(2 * cfg.d_e, 2 * cfg.d, rng);
  p.classifier_w = glorot(18 * cfg.d, 1, rng);
  p.classifier_b = Tensor::zeros(1, 1, true);
  return p;
}

std::vector<Tensor*> ModelParameters::all() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> ModelParameters::named() {
  std::vector<std::pair<std::string, Tensor*>> out = {
      {"text_adapter.w", &text_adapter_w},
      {"text_adapter.b", &text_adapter_b},
      {"visual_adapter.w", &visual_adapter_w},
      {"visual_adapter.b", &visual_adapter_b},
      {"dictionary.atoms", &dictionary},
  };
  const char* attn_names[] = {"attention.w_q", "attention.b_q", "attention.w_k", "attention.b_k",
                              "attention.w_v", "attention.b_v", "attention.w_o", "attention.b_o",
                              "attention.ln1_gain", "attention.ln1_bias", "attention.ln2_gain",
                              "attention.ln2_bias", "attention.ff_w1", "attention.ff_b1",
                              "attention.ff_w2", "attention.ff_b2"};
  auto attn = alignment.parameters();
  for (size_t i = 0; i < attn.size(); ++i) out.emplace_back(attn_names[i], attn[i]);
  out.emplace_back("aggregation.w", &agg_w);
  out.emplace_back("aggregation.b", &agg_b);
  out.emplace_back("kec_projection.w", &kec_projection);
  out.emplace_back("classifier.w", &classifier_w);
  out.emplace_back("classifier.b", &classifier_b);
  return out;
}

PostContext make_context(const Post& post, const kg::KnowledgeGraph& graph,
                         const kg::EmbeddingTable& emb, const RunConfig& cfg, double d_max,
                         paths::PairCache& cache, int* dropped_entities) {
  PostContext ctx;
  ctx.id = post.id;
  ctx.target = post.rumor_target();
  ctx.text_raw = Tensor::from_rows(post.text_features);
  ctx.visual_raw = Tensor::from_rows(post.visual_features);

  const auto text_ids = resolve_entities(post.text_entities, graph, emb, dropped_entities);
  const auto visual_ids = resolve_entities(post.visual_entities, graph, emb, dropped_entities);
  const kec::PairSets sets = kec::build_pair_sets(text_ids, visual_ids);

  auto correlate = [&](const std::vector<kec::EntityPair>& pairs) {
    std::vector<paths::PairCorrelation> out;
    out.reserve(pairs.size());
    for (const auto& pr : pairs) {
      if (const auto* hit = cache.find(pr.u, pr.v)) {
        out.push_back(*hit);
        continue;
      }
      out.push_back(cache.put(paths::semantic_distance(graph, emb, pr.u, pr.v, cfg.alpha,
                                                       cfg.hop_cap, d_max, cfg.disable_path)));
    }
    return out;
  };
  ctx.tt = correlate(sets.tt);
  ctx.vv = correlate(sets.vv);
  ctx.tv = correlate(sets.tv);
  return ctx;
}

Tensor classify(const Tensor& inconsistency, const Tensor& consistency, const Tensor& corr_tt,
                const Tensor& corr_tv, const Tensor& corr_vv, const ModelParameters& params) {
  Tensor joint = hcat({inconsistency, consistency, corr_tt, corr_tv, corr_vv});
  if (joint.cols() != params.classifier_w.rows())
    throw std::runtime_error("model: classifier width mismatch");
  return sigmoid(add_row(matmul(joint, params.classifier_w), params.classifier_b));
}

Tensor forward_post(const PostContext& ctx, const ModelParameters& params, const RunConfig& cfg) {
  const int d = params.d;

  Tensor inc, con, query;
  if (cfg.disable_bsc) {
    inc = Tensor::zeros(1, 3 * d);
    con = Tensor::zeros(1, 3 * d);
    query = Tensor::zeros(1, 2 * d);
  } else {
    Tensor text = add_row(matmul(ctx.text_raw, params.text_adapter_w), params.text_adapter_b);
    Tensor visual =
        add_row(matmul(ctx.visual_raw, params.visual_adapter_w), params.visual_adapter_b);
    bsc::Output out = bsc::forward(text, visual, params.dictionary, params.alignment, params.agg_w,
                                   params.agg_b, cfg.disable_align);
    inc = cfg.disable_se_i ? Tensor::zeros(1, 3 * d) : out.inconsistency;
    con = cfg.disable_se_c ? Tensor::zeros(1, 3 * d) : out.consistency;
    query = hcat({out.aligned_text_agg, out.aligned_visual_agg});
  }

  Tensor tt, tv, vv;
  if (cfg.disable_kec) {
    tt = Tensor::zeros(1, 4 * d);
    tv = Tensor::zeros(1, 4 * d);
    vv = Tensor::zeros(1, 4 * d);
  } else {
    tt = kec::entity_correlation(query, ctx.tt, cfg.k, params.kec_projection, cfg.disable_e_c,
                                 cfg.disable_e_i);
    tv = kec::entity_correlation(query, ctx.tv, cfg.k, params.kec_projection, cfg.disable_e_c,
                                 cfg.disable_e_i);
    vv = kec::entity_correlation(query, ctx.vv, cfg.k, params.kec_projection, cfg.disable_e_c,
                                 cfg.disable_e_i);
  }

  return classify(inc, con, tt, tv, vv, params);
}

void save_model(const ModelParameters& params, const RunConfig& cfg, double d_max,
                const std::string& path) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(cfg, d_max, params.d_raw));
  nlohmann::json tensors;
  auto named = const_cast<ModelParameters&>(params).named();
  for (auto& [name, t] : named) {
    nlohmann::json entry;
    entry["rows"] = t->rows();
    entry["cols"] = t->cols();
    entry["data"] = t->data();
    tensors[name] = std::move(entry);
  }
  j["tensors"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("model: cannot write " + path);
  out << j.dump();
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception&) {
    throw std::runtime_error("model: bad JSON in " + path);
  }

  LoadedModel lm;
  const auto& jc = j.at("config");
  RunConfig& c = lm.config;
  c.triples_path = jc.at("triples_path").get<std::string>();
  c.embeddings_path = jc.at("embeddings_path").get<std::string>();
  c.posts_path = jc.at("posts_path").get<std::string>();
  c.d = jc.at("d").get<int>();
  c.d_e = jc.at("d_e").get<int>();
  c.dictionary_size = jc.at("M").get<int>();
  c.k = jc.at("k").get<int>();
  c.alpha = jc.at("alpha").get<double>();
  c.hop_cap = jc.at("hop_cap").get<int>();
  c.heads = jc.at("heads").get<int>();
  c.lr = jc.at("lr").get<double>();
  c.batch = jc.at("batch").get<int>();
  c.epochs = jc.at("epochs").get<int>();
  c.seed = jc.at("seed").get<std::uint64_t>();
  c.disable_bsc = jc.at("disable_bsc").get<bool>();
  c.disable_kec = jc.at("disable_kec").get<bool>();
  c.disable_align = jc.at("disable_align").get<bool>();
  c.disable_se_i = jc.at("disable_se_i").get<bool>();
  c.disable_se_c = jc.at("disable_se_c").get<bool>();
  c.disable_e_i = jc.at("disable_e_i").get<bool>();
  c.disable_e_c = jc.at("disable_e_c").get<bool>();
  c.disable_path = jc.at("disable_path").get<bool>();
  lm.d_max = jc.at("d_max").get<double>();
  const int d_raw = jc.at("d_raw").get<int>();

  lm.params = ModelParameters::init(c, d_raw, c.seed);
  auto named = lm.params.named();
  const auto& jt = j.at("tensors");
  for (auto& [name, t] : named) {
    const auto& entry = jt.at(name);
    if (entry.at("rows").get<int>() != t->rows() || entry.at("cols").get<int>() != t->cols())
      throw std::runtime_error("model: tensor shape mismatch for " + name);
    t->data() = entry.at("data").get<std::vector<double>>();
  }
  return lm;
}

}  // namespace pipeline
}  // namespace kgrumor
