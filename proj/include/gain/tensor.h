#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gain {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  // Set for tensors produced by a recorded tape operation.
  bool is_intermediate = false;
  std::optional<std::vector<double>> grad;
};

}  // namespace detail

// Dense row-major array of doubles. A Tensor is a cheap handle: copies share
// storage. Values are fixed once an operation has produced them; only leaf
// tensors (parameters) are mutated, and only by initializers and optimizers.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value);
  static Tensor Scalar(double value);
  // 1-D tensor holding `values`.
  static Tensor Vector(std::vector<double> values);
  // 2-D tensor from nested rows; all rows must have equal length.
  static Tensor Matrix(const std::vector<std::vector<double>>& rows);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t size() const { return impl_->data.size(); }

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  // Element (r, c) of a 2-D tensor.
  double at(std::size_t r, std::size_t c) const;
  // Value of a one-element tensor.
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value) { impl_->requires_grad = value; }

  bool has_grad() const { return impl_->grad.has_value(); }
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void ZeroGrad();
  void ClearGrad() { impl_->grad.reset(); }

  // Deep copy detached from any tape.
  Tensor Clone() const;

  const detail::TensorImpl* id() const { return impl_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<detail::TensorImpl> impl_;

  friend class Tape;
};

}  // namespace gain
