#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "gain/rng.h"
#include "gain/tensor.h"

namespace gain {

enum class Activation { kRelu, kTanh };

enum class ElementwiseOp { kAdd, kSub, kMul, kAbs, kRelu, kTanh, kSigmoid };

// Records primitive operations as they run and replays them in reverse to
// compute gradients. Operations whose inputs do not require gradients are
// evaluated but not recorded. A tape supports exactly one backward pass; run
// a new forward on a fresh tape afterwards.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // [m x k] * [k x n] -> [m x n].
  Tensor MatMul(const Tensor& a, const Tensor& b);
  Tensor Transpose(const Tensor& a);

  // Binary kinds need `b` with the same shape as `a`; unary kinds ignore it.
  Tensor Elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b = Tensor());
  Tensor Add(const Tensor& a, const Tensor& b) { return Elementwise(ElementwiseOp::kAdd, a, b); }
  Tensor Sub(const Tensor& a, const Tensor& b) { return Elementwise(ElementwiseOp::kSub, a, b); }
  Tensor Mul(const Tensor& a, const Tensor& b) { return Elementwise(ElementwiseOp::kMul, a, b); }
  Tensor Abs(const Tensor& a) { return Elementwise(ElementwiseOp::kAbs, a); }
  Tensor Relu(const Tensor& a) { return Elementwise(ElementwiseOp::kRelu, a); }
  Tensor Tanh(const Tensor& a) { return Elementwise(ElementwiseOp::kTanh, a); }
  Tensor Sigmoid(const Tensor& a) { return Elementwise(ElementwiseOp::kSigmoid, a); }
  Tensor Activate(Activation act, const Tensor& a);

  // Adds the vector `bias` [n] to every row of `a` [m x n].
  Tensor AddRowBroadcast(const Tensor& a, const Tensor& bias);
  // x * w + bias, with w stored as [in x out].
  Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& bias);
  Tensor Scale(const Tensor& a, double factor);

  // All dimensions other than `axis` must agree.
  Tensor Concat(std::span<const Tensor> tensors, std::size_t axis);
  Tensor Concat(std::initializer_list<Tensor> tensors, std::size_t axis) {
    return Concat(std::span<const Tensor>(tensors.begin(), tensors.size()), axis);
  }
  // Elements [begin, end) along `axis`.
  Tensor Slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
  Tensor Reshape(const Tensor& a, Shape shape);

  // Mean over the rows of [n x d] -> [d].
  Tensor Mean(const Tensor& rows);
  // Sum of all elements -> scalar.
  Tensor Sum(const Tensor& a);
  // Softmax over all elements of `logits`.
  Tensor Softmax(const Tensor& logits);
  // Inverted dropout: survivors are scaled by 1 / (1 - rate).
  Tensor Dropout(const Tensor& x, double rate, bool training, Rng& rng);
  // Row gather from table [V x d] -> [ids.size() x d]. Gradients scatter-add.
  Tensor EmbeddingLookup(const Tensor& table, std::span<const std::size_t> ids);
  // Mean binary cross entropy over entries where mask == 1. Probabilities
  // are clamped to [1e-12, 1 - 1e-12].
  Tensor BceLoss(const Tensor& probs, const Tensor& targets, const Tensor& mask);

  // Populates grad() of every requires_grad leaf reachable from `loss`.
  // Gradients accumulate into existing leaf grads.
  void Backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  static constexpr double kProbEpsilon = 1e-12;

 private:
  using ImplPtr = std::shared_ptr<detail::TensorImpl>;

  class GradBuffer;
  struct Node {
    ImplPtr output;
    std::vector<ImplPtr> inputs;
    // Receives the output and its upstream gradient; accumulates into inputs.
    std::function<void(const detail::TensorImpl& out, std::span<const double> upstream,
                       GradBuffer& grads)>
        backward;
  };

  // Wraps `result` as the output of a recorded op when any input needs grad.
  Tensor Record(Shape shape, std::vector<double> data, std::vector<ImplPtr> inputs,
                std::function<void(const detail::TensorImpl&, std::span<const double>,
                                   GradBuffer&)>
                    backward);

  static const ImplPtr& Impl(const Tensor& t) { return t.impl_; }

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace gain
