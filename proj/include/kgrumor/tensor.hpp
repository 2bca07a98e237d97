#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgrumor {
namespace nn {

// Reverse-mode tape node. Nodes only point at their parents, so a graph is
// released as soon as the tensors holding its outputs go out of scope.
struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;  // scatters this->grad into parents
};

// Whether newly built ops record parents/backward closures. Thread local:
// a recorded trace is confined to the thread that built it.
bool grad_enabled();
void set_grad_enabled(bool on);

struct NoGradGuard {
  NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(prev_); }

 private:
  bool prev_;
};

// 2-d row-major tensor handle. Scalars are 1x1, row vectors 1xn.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor full(int rows, int cols, double fill);
  static Tensor scalar(double v);
  static Tensor from_rows(const std::vector<std::vector<double>>& rows,
                          bool requires_grad = false);
  static Tensor from_flat(int rows, int cols, std::vector<double> data,
                          bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  int numel() const { return node_->rows * node_->cols; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  double at(int r, int c) const { return node_->value[static_cast<size_t>(r) * node_->cols + c]; }
  double item() const;

  std::vector<double>& data() { return node_->value; }
  const std::vector<double>& data() const { return node_->value; }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  std::shared_ptr<Node>& node() { return node_; }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;

  friend Tensor make_op(int rows, int cols, std::vector<std::shared_ptr<Node>> parents);
};

// Allocates a node for an op result; requires_grad is inherited from parents
// and honored only while grad mode is on.
Tensor make_op(int rows, int cols, std::vector<std::shared_ptr<Node>> parents);

// Runs reverse accumulation from a 1x1 loss. Each reachable node is visited
// exactly once, in reverse topological order. Leaves keep whatever gradient
// they accumulate; unreachable leaves are left untouched.
void backward(const Tensor& loss);

}  // namespace nn
}  // namespace kgrumor
