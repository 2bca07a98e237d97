#include "kgrumor/bsc.hpp"

namespace kgrumor {
namespace bsc {

using namespace nn;

Tensor align(const Tensor& features, const Tensor& dictionary, const nn::TransformerLayer& layer,
             nn::AttentionProbe* probe) {
  if (!dictionary.defined() || dictionary.rows() == 0)
    throw std::runtime_error("bsc: empty dictionary");
  if (features.cols() != dictionary.cols())
    throw std::runtime_error("bsc: feature/dictionary width mismatch");
  return multi_head_attention(features, dictionary, dictionary, layer, probe);
}

Tensor aggregate(const Tensor& seq, const Tensor& w_a, const Tensor& b_a) {
  if (seq.rows() < 1) throw std::runtime_error("bsc: empty sequence");
  return add_row(matmul(mean_rows(seq), w_a), b_a);
}

FusedCorrelation fuse(const Tensor& f_t, const Tensor& f_t_aligned, const Tensor& f_v,
                      const Tensor& f_v_aligned) {
  Tensor r_t = sub(f_t, f_t_aligned);
  Tensor r_v = sub(f_v, f_v_aligned);
  FusedCorrelation out;
  out.inconsistency = hcat({r_t, sub(r_t, r_v), r_v});
  out.consistency = hcat({f_t_aligned, mul(f_t_aligned, f_v_aligned), f_v_aligned});
  return out;
}

Output forward(const Tensor& text, const Tensor& visual, const Tensor& dictionary,
               const nn::TransformerLayer& layer, const Tensor& w_a, const Tensor& b_a,
               bool align_bypass) {
  Tensor text_aligned = align_bypass ? text : align(text, dictionary, layer);
  Tensor visual_aligned = align_bypass ? visual : align(visual, dictionary, layer);

  Tensor f_t = aggregate(text, w_a, b_a);
  Tensor f_t_hat = aggregate(text_aligned, w_a, b_a);
  Tensor f_v = aggregate(visual, w_a, b_a);
  Tensor f_v_hat = aggregate(visual_aligned, w_a, b_a);

  FusedCorrelation fused = fuse(f_t, f_t_hat, f_v, f_v_hat);
  Output out;
  out.inconsistency = fused.inconsistency;
  out.consistency = fused.consistency;
  out.aligned_text_agg = f_t_hat;
  out.aligned_visual_agg = f_v_hat;
  return out;
}

}  // namespace bsc
}  // namespace kgrumor
