#include "kgrumor/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

namespace kgrumor {
namespace pipeline {

using namespace nn;

Metrics compute_metrics(const std::vector<double>& rumor_probs,
                        const std::vector<double>& rumor_targets) {
  if (rumor_probs.size() != rumor_targets.size())
    throw std::runtime_error("metrics: size mismatch");
  Metrics m;
  for (size_t i = 0; i < rumor_probs.size(); ++i) {
    const bool pred = rumor_probs[i] >= 0.5;
    const bool truth = rumor_targets[i] >= 0.5;
    if (pred && truth) ++m.tp;
    else if (pred && !truth) ++m.fp;
    else if (!pred && truth) ++m.fn;
    else ++m.tn;
  }
  const int total = m.tp + m.fp + m.fn + m.tn;
  m.accuracy = total ? static_cast<double>(m.tp + m.tn) / total : 0.0;
  m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
  return m;
}

Split split_indices(int n, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed + 1);
  std::shuffle(idx.begin(), idx.end(), rng);
  Split s;
  const int n_train = static_cast<int>(0.7 * n);
  const int n_val = static_cast<int>(0.1 * n);
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  return s;
}

Metrics evaluate(const std::vector<PostContext>& contexts, const ModelParameters& params,
                 const RunConfig& cfg, const std::vector<int>& indices) {
  NoGradGuard no_grad;
  std::vector<double> probs, targets;
  probs.reserve(indices.size());
  targets.reserve(indices.size());
  for (int i : indices) {
    probs.push_back(forward_post(contexts[i], params, cfg).item());
    targets.push_back(contexts[i].target);
  }
  return compute_metrics(probs, targets);
}

TrainResult train(std::vector<PostContext>& contexts, ModelParameters& params,
                  const RunConfig& cfg, const Split& split) {
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  Adam opt(params.all(), acfg);
  std::mt19937_64 shuffle_rng(cfg.seed + 2);

  TrainResult result;
  std::vector<int> order = split.train;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_sum = 0.0;
    int seen = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      const size_t end = std::min(order.size(), start + cfg.batch);
      opt.zero_grad();
      std::vector<Tensor> losses;
      losses.reserve(end - start);
      for (size_t i = start; i < end; ++i) {
        const PostContext& ctx = contexts[order[i]];
        Tensor prob = forward_post(ctx, params, cfg);
        Tensor loss = bce_loss(prob, ctx.target);
        if (!std::isfinite(loss.item()))
          throw std::runtime_error("train: non-finite loss at post " + ctx.id);
        losses.push_back(loss);
      }
      Tensor batch_loss =
          scale(sum_all(hcat(losses)), 1.0 / static_cast<double>(losses.size()));
      backward(batch_loss);
      opt.step();
      epoch_sum += batch_loss.item() * static_cast<double>(losses.size());
      seen += static_cast<int>(losses.size());
    }
    result.epoch_loss.push_back(seen ? epoch_sum / seen : 0.0);
  }

  result.test_metrics = evaluate(contexts, params, cfg, split.test);
  return result;
}

std::string metrics_to_json(const Metrics& m, const std::vector<double>& epoch_loss,
                            const RunConfig& cfg, double d_max, int d_raw) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["confusion"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
  j["epoch_loss"] = epoch_loss;
  j["config"] = nlohmann::json::parse(config_to_json(cfg, d_max, d_raw));
  return j.dump(2);
}

}  // namespace pipeline
}  // namespace kgrumor
