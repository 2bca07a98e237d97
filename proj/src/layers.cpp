#include "kgrumor/layers.hpp"

#include <cmath>

namespace kgrumor {
namespace nn {

Tensor glorot(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t = Tensor::zeros(rows, cols, true);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

TransformerLayer TransformerLayer::create(int d, int heads, std::mt19937_64& rng) {
  if (d <= 0 || heads <= 0 || d % heads != 0)
    throw std::runtime_error("transformer: width must be divisible by head count");
  auto ones_param = [](int n) {
    Tensor t = Tensor::zeros(1, n, true);
    for (double& x : t.data()) x = 1.0;
    return t;
  };
  TransformerLayer l;
  l.heads = heads;
  l.w_q = glorot(d, d, rng);
  l.b_q = Tensor::zeros(1, d, true);
  l.w_k = glorot(d, d, rng);
  l.b_k = Tensor::zeros(1, d, true);
  l.w_v = glorot(d, d, rng);
  l.b_v = Tensor::zeros(1, d, true);
  l.w_o = glorot(d, d, rng);
  l.b_o = Tensor::zeros(1, d, true);
  l.ln1_gain = ones_param(d);
  l.ln1_bias = Tensor::zeros(1, d, true);
  l.ln2_gain = ones_param(d);
  l.ln2_bias = Tensor::zeros(1, d, true);
  l.ff_w1 = glorot(d, 4 * d, rng);
  l.ff_b1 = Tensor::zeros(1, 4 * d, true);
  l.ff_w2 = glorot(4 * d, d, rng);
  l.ff_b2 = Tensor::zeros(1, d, true);
  return l;
}

TransformerLayer TransformerLayer::identity(int d, int heads) {
  if (d <= 0 || heads <= 0 || d % heads != 0)
    throw std::runtime_error("transformer: width must be divisible by head count");
  TransformerLayer l;
  l.heads = heads;
  l.residual = false;
  l.feed_forward = false;
  auto eye = [d]() {
    Tensor t = Tensor::zeros(d, d, false);
    for (int i = 0; i < d; ++i) t.data()[i * d + i] = 1.0;
    return t;
  };
  l.w_q = eye();
  l.w_k = eye();
  l.w_v = eye();
  l.w_o = eye();
  l.b_q = Tensor::zeros(1, d);
  l.b_k = Tensor::zeros(1, d);
  l.b_v = Tensor::zeros(1, d);
  l.b_o = Tensor::zeros(1, d);
  return l;
}

std::vector<Tensor*> TransformerLayer::parameters() {
  std::vector<Tensor*> out = {&w_q, &b_q, &w_k, &b_k, &w_v, &b_v, &w_o, &b_o};
  if (residual) {
    out.push_back(&ln1_gain);
    out.push_back(&ln1_bias);
    out.push_back(&ln2_gain);
    out.push_back(&ln2_bias);
  }
  if (feed_forward) {
    out.push_back(&ff_w1);
    out.push_back(&ff_b1);
    out.push_back(&ff_w2);
    out.push_back(&ff_b2);
  }
  return out;
}

Tensor multi_head_attention(const Tensor& query, const Tensor& key, const Tensor& value,
                            const TransformerLayer& layer, AttentionProbe* probe) {
  if (!key.defined() || key.rows() == 0) throw std::runtime_error("attention: empty key set");
  const int d = query.cols();
  if (key.cols() != d || value.cols() != d)
    throw std::runtime_error("attention: query/key/value width mismatch");
  if (key.rows() != value.rows()) throw std::runtime_error("attention: key/value row mismatch");
  if (d % layer.heads != 0) throw std::runtime_error("attention: width not divisible by heads");

  const int dh = d / layer.heads;
  const double scale_f = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor q = add_row(matmul(query, layer.w_q), layer.b_q);
  Tensor k = add_row(matmul(key, layer.w_k), layer.b_k);
  Tensor v = add_row(matmul(value, layer.w_v), layer.b_v);

  std::vector<Tensor> heads;
  heads.reserve(layer.heads);
  for (int h = 0; h < layer.heads; ++h) {
    Tensor qh = slice_cols(q, h * dh, dh);
    Tensor kh = slice_cols(k, h * dh, dh);
    Tensor vh = slice_cols(v, h * dh, dh);
    Tensor probs = softmax_rows(scale(matmul_nt(qh, kh), scale_f));
    Tensor ctx = matmul(probs, vh);
    if (probe) {
      probe->head_probs.push_back(probs);
      probe->head_ctx.push_back(ctx);
    }
    heads.push_back(ctx);
  }
  Tensor attn = add_row(matmul(hcat(heads), layer.w_o), layer.b_o);

  Tensor x = attn;
  if (layer.residual) x = layer_norm(add(query, attn), layer.ln1_gain, layer.ln1_bias);
  if (layer.feed_forward) {
    Tensor h1 = gelu(add_row(matmul(x, layer.ff_w1), layer.ff_b1));
    Tensor h2 = add_row(matmul(h1, layer.ff_w2), layer.ff_b2);
    x = layer.residual ? layer_norm(add(x, h2), layer.ln2_gain, layer.ln2_bias) : h2;
  }
  return x;
}

Adam::Adam(std::vector<Tensor*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (Tensor* p : params_) {
    if (!p->requires_grad()) throw std::runtime_error("adam: parameter without grad");
    m_.emplace_back(p->numel(), 0.0);
    v_.emplace_back(p->numel(), 0.0);
  }
}

void Adam::zero_grad() {
  for (Tensor* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& val = params_[i]->data();
    const auto& g = params_[i]->grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < val.size(); ++j) {
      if (!std::isfinite(g[j])) throw std::runtime_error("adam: non-finite gradient");
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      val[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace nn
}  // namespace kgrumor
