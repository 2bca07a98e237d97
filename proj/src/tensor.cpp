#include "kgrumor/tensor.hpp"

#include <unordered_set>

namespace kgrumor {
namespace nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool on) { g_grad_enabled = on; }

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  if (rows <= 0 || cols <= 0) throw std::runtime_error("tensor: non-positive shape");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(static_cast<size_t>(rows) * cols, 0.0);
  n->requires_grad = requires_grad;
  if (requires_grad) n->grad.assign(n->value.size(), 0.0);
  return Tensor(std::move(n));
}

Tensor Tensor::full(int rows, int cols, double fill) {
  Tensor t = zeros(rows, cols, false);
  for (double& v : t.data()) v = fill;
  return t;
}

Tensor Tensor::scalar(double v) { return full(1, 1, v); }

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad) {
  if (rows.empty() || rows[0].empty()) throw std::runtime_error("tensor: empty rows");
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows[0].size());
  Tensor t = zeros(r, c, requires_grad);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c) throw std::runtime_error("tensor: ragged rows");
    for (int j = 0; j < c; ++j) t.data()[static_cast<size_t>(i) * c + j] = rows[i][j];
  }
  return t;
}

Tensor Tensor::from_flat(int rows, int cols, std::vector<double> data, bool requires_grad) {
  if (static_cast<size_t>(rows) * cols != data.size())
    throw std::runtime_error("tensor: data length does not match shape");
  Tensor t = zeros(rows, cols, requires_grad);
  t.data() = std::move(data);
  return t;
}

double Tensor::item() const {
  if (numel() != 1) throw std::runtime_error("tensor: item() on non-scalar");
  return node_->value[0];
}

std::vector<double>& Tensor::grad() {
  if (!requires_grad()) throw std::runtime_error("tensor: grad() without requires_grad");
  return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (!requires_grad()) throw std::runtime_error("tensor: grad() without requires_grad");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (requires_grad()) node_->grad.assign(node_->value.size(), 0.0);
}

Tensor make_op(int rows, int cols, std::vector<std::shared_ptr<Node>> parents) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(static_cast<size_t>(rows) * cols, 0.0);
  if (g_grad_enabled) {
    for (const auto& p : parents) {
      if (p && p->requires_grad) {
        n->requires_grad = true;
        break;
      }
    }
  }
  if (n->requires_grad) {
    n->grad.assign(n->value.size(), 0.0);
    n->parents = std::move(parents);
  }
  return Tensor(std::move(n));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) throw std::runtime_error("backward: loss must be 1x1");
  if (!loss.requires_grad()) throw std::runtime_error("backward: loss does not require grad");

  // Iterative post-order; order holds children after all of their parents'
  // positions are irrelevant -- we only need reverse topological order, i.e.
  // every node before its parents when walked from the back.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace nn
}  // namespace kgrumor
