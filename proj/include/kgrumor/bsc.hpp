#pragma once

#include "kgrumor/layers.hpp"

namespace kgrumor {
namespace bsc {

using nn::Tensor;

// Cross-modal joint dictionary alignment: every feature row attends over the
// shared atom set through one shared attention layer, for both modalities.
//   aligned = attention(query = features, key = value = atoms)
Tensor align(const Tensor& features, const Tensor& dictionary, const nn::TransformerLayer& layer,
             nn::AttentionProbe* probe = nullptr);

// Mean over sequence positions followed by one shared affine map:
//   aggregate(X) = mean_rows(X) * W_a + b_a           -> (1, d)
Tensor aggregate(const Tensor& seq, const Tensor& w_a, const Tensor& b_a);

struct FusedCorrelation {
  Tensor inconsistency;  // (1, 3d)
  Tensor consistency;    // (1, 3d)
};

// Compare-and-aggregate fusion of the four aggregated vectors.
// With r_T = f_T - f^_T and r_V = f_V - f^_V (reconstruction residuals):
//   inconsistency = [r_T ; r_T - r_V ; r_V]
//   consistency   = [f^_T ; f^_T * f^_V ; f^_V]     (* is elementwise)
FusedCorrelation fuse(const Tensor& f_t, const Tensor& f_t_aligned, const Tensor& f_v,
                      const Tensor& f_v_aligned);

struct Output {
  Tensor inconsistency;      // (1, 3d)
  Tensor consistency;        // (1, 3d)
  Tensor aligned_text_agg;   // (1, d), query material for entity correlation
  Tensor aligned_visual_agg; // (1, d)
};

// Full branch over adapted feature sequences. With align_bypass the aligned
// sequences are the inputs themselves (ablation wiring).
Output forward(const Tensor& text, const Tensor& visual, const Tensor& dictionary,
               const nn::TransformerLayer& layer, const Tensor& w_a, const Tensor& b_a,
               bool align_bypass = false);

}  // namespace bsc
}  // namespace kgrumor
