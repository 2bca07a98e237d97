#pragma once

#include "kgrumor/tensor.hpp"

namespace kgrumor {
namespace nn {

// All ops allocate a fresh node and, when grad mode is on and any input
// requires grad, record a backward closure. Shapes are checked up front and
// violations throw std::runtime_error with a short op-prefixed message.

Tensor add(const Tensor& a, const Tensor& b);        // same shape
Tensor sub(const Tensor& a, const Tensor& b);        // same shape
Tensor mul(const Tensor& a, const Tensor& b);        // elementwise, same shape
Tensor scale(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);     // (m,k)x(k,n) -> (m,n)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (m,k)x(n,k)^T -> (m,n)
Tensor add_row(const Tensor& a, const Tensor& bias); // bias (1,n) broadcast over rows
Tensor softmax_rows(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor mean_rows(const Tensor& a);                   // (m,n) -> (1,n)
Tensor sum_all(const Tensor& a);                     // -> (1,1)
Tensor hcat(const std::vector<Tensor>& parts);       // shared row count
Tensor vcat(const std::vector<Tensor>& parts);       // shared col count
Tensor slice_cols(const Tensor& a, int offset, int len);
Tensor reshape(const Tensor& a, int rows, int cols); // same numel, copy
Tensor div_scalar(const Tensor& a, const Tensor& s); // s is 1x1

// Binary cross entropy of a 1x1 probability against target y in {0,1}.
// The probability is clamped to [1e-7, 1 - 1e-7] before the logs.
Tensor bce_loss(const Tensor& prob, double target);

}  // namespace nn
}  // namespace kgrumor
