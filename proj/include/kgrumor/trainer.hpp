#pragma once

#include "kgrumor/model.hpp"

namespace kgrumor {
namespace pipeline {

// Rumor (label 0, target 1) is the positive class; prediction threshold 0.5.
struct Metrics {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

Metrics compute_metrics(const std::vector<double>& rumor_probs,
                        const std::vector<double>& rumor_targets);

// 70/10/20 index split from a seeded shuffle; sizes floor(0.7n), floor(0.1n),
// remainder.
struct Split {
  std::vector<int> train, val, test;
};
Split split_indices(int n, std::uint64_t seed);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean train BCE per epoch
  Metrics test_metrics;
};

// Mini-batch Adam over the train portion; loss is the batch-mean BCE.
// Aborts with the offending post id if a loss turns non-finite. Evaluates
// the test portion once at the end.
TrainResult train(std::vector<PostContext>& contexts, ModelParameters& params,
                  const RunConfig& cfg, const Split& split);

Metrics evaluate(const std::vector<PostContext>& contexts, const ModelParameters& params,
                 const RunConfig& cfg, const std::vector<int>& indices);

std::string metrics_to_json(const Metrics& m, const std::vector<double>& epoch_loss,
                            const RunConfig& cfg, double d_max, int d_raw);

}  // namespace pipeline
}  // namespace kgrumor
