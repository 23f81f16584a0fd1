#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mmrisk {

// Dense 64-bit float tensor with reverse-mode autodiff. The computation
// graph is rebuilt on every forward pass (define-by-run); values are
// immutable once an op has produced them, grad buffers accumulate.
//
// Supported ranks are 1 (vector) and 2 (matrix, row-major). The only
// broadcast is leading-batch expansion: a (d) or (1 x d) operand expands
// over the rows of an (n x d) operand in add/mul. Anything else is a
// shape error, reported with the op name and the offending shapes.
class Tensor {
 public:
  struct Node {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated on first use, same length as value
    bool requires_grad = false;
    std::string op;  // empty for leaves
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // pulls node.grad into parents
    size_t numel() const { return value.size(); }
    void ensure_grad() {
      if (grad.empty()) grad.assign(value.size(), 0.0);
    }
  };

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  // Row/column view of the shape: rank-1 tensors count as a single row.
  int rows() const { return rank() == 2 ? node_->shape[0] : 1; }
  int cols() const { return rank() == 2 ? node_->shape[1] : node_->shape[0]; }
  size_t size() const { return node_->value.size(); }

  const std::vector<double>& values() const { return node_->value; }
  // Leaf-only mutation hook for initializers, optimizers and finite
  // differences. Mutating a non-leaf invalidates nothing but makes no
  // sense; callers own that discipline.
  std::vector<double>& raw_values() { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  const std::vector<double>& grad() const;
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  }

  double item() const;
  double at(int r, int c) const { return node_->value[static_cast<size_t>(r) * cols() + c]; }

  std::shared_ptr<Node> node() const { return node_; }

  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<Node> node_;
};

// --- primitive ops -----------------------------------------------------
// Each op checks its shape rule, computes the value eagerly, and records
// a backprop closure so backward() can replay the chain rule.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);  // derivative at exactly 0 is 0
Tensor sigmoid(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a);  // epsilon fixed at 1e-5, last axis
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);  // concat along last axis
Tensor slice_rows(const Tensor& a, int start, int len);
Tensor slice_cols(const Tensor& a, int start, int len);
Tensor repeat_rows(const Tensor& a, int n);  // (1 x d) -> (n x d)
Tensor mean_all(const Tensor& a);
Tensor sum_all(const Tensor& a);
Tensor cumsum_last(const Tensor& a);
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& indices);

// Censoring-masked binary cross-entropy evaluated from logits via the
// softplus form, normalized by the number of unmasked entries. Rejects an
// all-zero mask ("fully censored example").
Tensor masked_bce_with_logits(const Tensor& logits,
                              const std::array<int, 6>& targets,
                              const std::array<int, 6>& mask);

// Populates grad on every requires_grad ancestor of `loss`. The loss must
// be a scalar. Repeated calls without zeroing accumulate.
void backward(const Tensor& loss);

double sigmoid_scalar(double x);
double softplus_scalar(double x);

}  // namespace mmrisk
