#pragma once

#include <random>

#include "kgrumor/ops.hpp"

namespace kgrumor {
namespace nn {

// Fan-scaled uniform init, limit sqrt(6 / (fan_in + fan_out)).
Tensor glorot(int rows, int cols, std::mt19937_64& rng);

// One post-norm transformer block with shared-parameter multi-head attention.
//   attn = W_o-projected concat of softmax(Q_h K_h^T / sqrt(d/heads)) V_h
//   x    = LN1(query + attn)          (residual wiring optional)
//   out  = LN2(x + FFN(x))            (FFN is x4 expansion with GELU)
// Disabling residual also disables the layer norms; disabling the FFN drops
// the second sublayer entirely. Tests pin both reduced wirings.
struct TransformerLayer {
  Tensor w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;  // (d,d) and (1,d)
  Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;  // (1,d)
  Tensor ff_w1, ff_b1, ff_w2, ff_b2;              // (d,4d),(1,4d),(4d,d),(1,d)
  int heads = 1;
  bool residual = true;
  bool feed_forward = true;

  static TransformerLayer create(int d, int heads, std::mt19937_64& rng);
  // Identity projections, no residual, no FFN; used by reduced-wiring tests.
  static TransformerLayer identity(int d, int heads);

  std::vector<Tensor*> parameters();
};

// Per-head softmax rows and per-head context, captured for inspection.
struct AttentionProbe {
  std::vector<Tensor> head_probs;  // each (n, m)
  std::vector<Tensor> head_ctx;    // each (n, d/heads)
};

// query (n,d), key (m,d), value (m,d) -> (n,d). Throws on empty key/value,
// head-divisibility violations, and query/key width mismatch.
Tensor multi_head_attention(const Tensor& query, const Tensor& key, const Tensor& value,
                            const TransformerLayer& layer, AttentionProbe* probe = nullptr);

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter list. Moments are zero-initialized,
// so a parameter whose gradient stays zero never moves.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamConfig cfg);

  void zero_grad();
  void step();  // throws on non-finite gradients
  int64_t steps_taken() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  int64_t t_ = 0;
};

}  // namespace nn
}  // namespace kgrumor
