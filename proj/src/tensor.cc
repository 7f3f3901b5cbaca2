#include "gain/tensor.h"

#include <algorithm>
#include <sstream>

#include "gain/errors.h"

namespace gain {

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << "x";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  if (NumElements(shape) != data.size()) {
    throw DimensionError("tensor shape " + ShapeString(shape) + " holds " +
                         std::to_string(NumElements(shape)) + " elements, got " +
                         std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  std::vector<double> data(NumElements(shape), 0.0);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::Full(Shape shape, double value) {
  std::vector<double> data(NumElements(shape), value);
  return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::Scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::Vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::Matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("ragged rows in Tensor::Matrix");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (rank() != 2) throw DimensionError("at(r, c) needs a 2-D tensor, got " + ShapeString(shape()));
  if (r >= dim(0) || c >= dim(1)) throw IndexError("index out of range");
  return impl_->data[r * dim(1) + c];
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + ShapeString(shape()));
  return impl_->data[0];
}

std::span<const double> Tensor::grad() const {
  if (!impl_->grad) return {};
  return *impl_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!impl_->grad) impl_->grad.emplace(impl_->data.size(), 0.0);
  return *impl_->grad;
}

void Tensor::ZeroGrad() {
  if (impl_->grad) std::fill(impl_->grad->begin(), impl_->grad->end(), 0.0);
}

Tensor Tensor::Clone() const {
  Tensor copy(impl_->shape, impl_->data, impl_->requires_grad);
  if (impl_->grad) copy.impl_->grad = impl_->grad;
  return copy;
}

}  // namespace gain
