#include "gain/tape.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gain/errors.h"

namespace gain {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

double StableSigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void RequireRank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + ShapeString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) +
                         " vs " + ShapeString(b.shape()));
  }
}

}  // namespace

// Gradient storage for one backward pass. Intermediates get slots private to
// the pass; leaves accumulate straight into their own grad, so a parameter
// touched by many documents never needs a per-pass copy.
class Tape::GradBuffer {
 public:
  // Gradient slot for `t`, or an empty span if `t` does not need one.
  std::span<double> For(const ImplPtr& t) {
    if (!t->requires_grad) return {};
    if (!t->is_intermediate) {
      if (!t->grad) t->grad.emplace(t->data.size(), 0.0);
      return *t->grad;
    }
    auto [it, inserted] = grads_.try_emplace(t.get());
    if (inserted) it->second.assign(t->data.size(), 0.0);
    return it->second;
  }

  const std::vector<double>* Find(const detail::TensorImpl* t) const {
    auto it = grads_.find(t);
    return it == grads_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<const detail::TensorImpl*, std::vector<double>> grads_;
};

Tensor Tape::Record(Shape shape, std::vector<double> data, std::vector<ImplPtr> inputs,
                    std::function<void(const detail::TensorImpl&, std::span<const double>,
                                       GradBuffer&)>
                        backward) {
  const bool needs_grad =
      std::any_of(inputs.begin(), inputs.end(), [](const ImplPtr& p) { return p->requires_grad; });
  Tensor out(std::move(shape), std::move(data));
  if (!needs_grad) return out;
  out.impl_->requires_grad = true;
  out.impl_->is_intermediate = true;
  nodes_.push_back(Node{out.impl_, std::move(inputs), std::move(backward)});
  return out;
}

Tensor Tape::MatMul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + ShapeString(a.shape()) + " by " +
                         ShapeString(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  if (m > 0 && n > 0 && k > 0) {
    MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  }
  ImplPtr pa = Impl(a), pb = Impl(b);
  return Record({m, n}, std::move(out), {pa, pb},
                [pa, pb, m, k, n](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  if (m == 0 || n == 0 || k == 0) return;
                  ConstMap dc(g.data(), m, n);
                  if (auto ga = grads.For(pa); !ga.empty()) {
                    MutMap(ga.data(), m, k).noalias() += dc * ConstMap(pb->data.data(), k, n).transpose();
                  }
                  if (auto gb = grads.For(pb); !gb.empty()) {
                    MutMap(gb.data(), k, n).noalias() += ConstMap(pa->data.data(), m, k).transpose() * dc;
                  }
                });
}

Tensor Tape::Transpose(const Tensor& a) {
  RequireRank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  ImplPtr pa = Impl(a);
  return Record({n, m}, std::move(out), {pa},
                [pa, m, n](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
                });
}

Tensor Tape::Elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
  const bool binary = op == ElementwiseOp::kAdd || op == ElementwiseOp::kSub || op == ElementwiseOp::kMul;
  if (binary) {
    if (!b.defined()) throw ArgumentError("elementwise: binary op needs two operands");
    RequireSameShape(a, b, "elementwise");
  }
  const std::size_t n = a.size();
  std::vector<double> out(n);
  auto x = a.data();
  switch (op) {
    case ElementwiseOp::kAdd:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + b[i];
      break;
    case ElementwiseOp::kSub:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - b[i];
      break;
    case ElementwiseOp::kMul:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * b[i];
      break;
    case ElementwiseOp::kAbs:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(x[i]);
      break;
    case ElementwiseOp::kRelu:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    case ElementwiseOp::kTanh:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
      break;
    case ElementwiseOp::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) out[i] = StableSigmoid(x[i]);
      break;
  }

  ImplPtr pa = Impl(a);
  if (binary) {
    ImplPtr pb = Impl(b);
    return Record(a.shape(), std::move(out), {pa, pb},
                  [op, pa, pb](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                    auto ga = grads.For(pa);
                    auto gb = grads.For(pb);
                    const std::size_t n = g.size();
                    switch (op) {
                      case ElementwiseOp::kAdd:
                        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i];
                        break;
                      case ElementwiseOp::kSub:
                        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
                        break;
                      default:
                        if (!ga.empty())
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * pb->data[i];
                        if (!gb.empty())
                          for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * pa->data[i];
                        break;
                    }
                  });
  }
  return Record(a.shape(), std::move(out), {pa},
                [op, pa](const detail::TensorImpl& y, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  const auto& x = pa->data;
                  for (std::size_t i = 0; i < ga.size(); ++i) {
                    double d = 0.0;
                    switch (op) {
                      case ElementwiseOp::kAbs:
                        d = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
                        break;
                      case ElementwiseOp::kRelu:
                        d = x[i] > 0.0 ? 1.0 : 0.0;
                        break;
                      case ElementwiseOp::kTanh:
                        d = 1.0 - y.data[i] * y.data[i];
                        break;
                      case ElementwiseOp::kSigmoid:
                        d = y.data[i] * (1.0 - y.data[i]);
                        break;
                      default:
                        break;
                    }
                    ga[i] += g[i] * d;
                  }
                });
}

Tensor Tape::Activate(Activation act, const Tensor& a) {
  return act == Activation::kRelu ? Relu(a) : Tanh(a);
}

Tensor Tape::AddRowBroadcast(const Tensor& a, const Tensor& bias) {
  RequireRank(a, 2, "add_row_broadcast");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (bias.size() != n) {
    throw DimensionError("add_row_broadcast: bias " + ShapeString(bias.shape()) + " vs rows of " +
                         ShapeString(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias[j];
  ImplPtr pa = Impl(a), pb = Impl(bias);
  return Record(a.shape(), std::move(out), {pa, pb},
                [pa, pb, m, n](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                  auto gb = grads.For(pb);
                  if (gb.empty()) return;
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
                });
}

Tensor Tape::Linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  return AddRowBroadcast(MatMul(x, w), bias);
}

Tensor Tape::Scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  ImplPtr pa = Impl(a);
  return Record(a.shape(), std::move(out), {pa},
                [pa, factor](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * factor;
                });
}

Tensor Tape::Concat(std::span<const Tensor> tensors, std::size_t axis) {
  if (tensors.empty()) throw ArgumentError("concat: empty tensor list");
  const Shape& first = tensors.front().shape();
  if (axis >= first.size()) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " + ShapeString(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& t : tensors) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw DimensionError("concat: cannot join " + ShapeString(first) + " and " + ShapeString(s) +
                           " on axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_block = out_shape[axis] * inner;

  std::vector<double> out(NumElements(out_shape));
  std::vector<ImplPtr> inputs;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& t : tensors) {
    const std::size_t block = t.dim(axis) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(t.data().begin() + o * block, block, out.begin() + o * out_block + offset);
    }
    inputs.push_back(Impl(t));
    offsets.push_back(offset);
    offset += block;
  }
  return Record(std::move(out_shape), std::move(out), inputs,
                [inputs, offsets, outer, out_block](const detail::TensorImpl&, std::span<const double> g,
                                                    GradBuffer& grads) {
                  for (std::size_t i = 0; i < inputs.size(); ++i) {
                    auto gi = grads.For(inputs[i]);
                    if (gi.empty()) continue;
                    const std::size_t block = gi.size() / outer;
                    for (std::size_t o = 0; o < outer; ++o)
                      for (std::size_t j = 0; j < block; ++j) gi[o * block + j] += g[o * out_block + offsets[i] + j];
                  }
                });
}

Tensor Tape::Slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= a.rank()) throw DimensionError("slice: axis out of range for " + ShapeString(a.shape()));
  if (begin > end || end > a.dim(axis)) {
    throw IndexError("slice: [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                     ShapeString(a.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= a.dim(d);
  for (std::size_t d = axis + 1; d < a.rank(); ++d) inner *= a.dim(d);
  const std::size_t in_block = a.dim(axis) * inner;
  const std::size_t block = (end - begin) * inner;
  Shape shape = a.shape();
  shape[axis] = end - begin;
  std::vector<double> out(outer * block);
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(a.data().begin() + o * in_block + begin * inner, block, out.begin() + o * block);
  }
  ImplPtr pa = Impl(a);
  const std::size_t start = begin * inner;
  return Record(std::move(shape), std::move(out), {pa},
                [pa, outer, in_block, block, start](const detail::TensorImpl&, std::span<const double> g,
                                                    GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (std::size_t o = 0; o < outer; ++o)
                    for (std::size_t j = 0; j < block; ++j) ga[o * in_block + start + j] += g[o * block + j];
                });
}

Tensor Tape::Reshape(const Tensor& a, Shape shape) {
  if (NumElements(shape) != a.size()) {
    throw DimensionError("reshape: " + ShapeString(a.shape()) + " to " + ShapeString(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  ImplPtr pa = Impl(a);
  return Record(std::move(shape), std::move(out), {pa},
                [pa](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                });
}

Tensor Tape::Mean(const Tensor& rows) {
  RequireRank(rows, 2, "mean");
  const std::size_t n = rows.dim(0), d = rows.dim(1);
  if (n == 0) throw ArgumentError("mean: no rows");
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += rows[i * d + j];
  for (double& v : out) v /= static_cast<double>(n);
  ImplPtr pa = Impl(rows);
  return Record({d}, std::move(out), {pa},
                [pa, n, d](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  const double inv = 1.0 / static_cast<double>(n);
                  for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) ga[i * d + j] += g[j] * inv;
                });
}

Tensor Tape::Sum(const Tensor& a) {
  const double total = std::accumulate(a.data().begin(), a.data().end(), 0.0);
  ImplPtr pa = Impl(a);
  return Record({}, {total}, {pa},
                [pa](const detail::TensorImpl&, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (double& v : ga) v += g[0];
                });
}

Tensor Tape::Softmax(const Tensor& logits) {
  const std::size_t n = logits.size();
  if (n == 0) throw ArgumentError("softmax: empty input");
  auto x = logits.data();
  for (double v : x) {
    if (std::isnan(v)) throw NumericError("softmax: NaN input");
  }
  const double max = *std::max_element(x.begin(), x.end());
  std::vector<double> out(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(x[i] - max);
    total += out[i];
  }
  for (double& v : out) v /= total;
  ImplPtr pa = Impl(logits);
  return Record(logits.shape(), std::move(out), {pa},
                [pa](const detail::TensorImpl& y, std::span<const double> g, GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  double dot = 0.0;
                  for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y.data[i];
                  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += y.data[i] * (g[i] - dot);
                });
}

Tensor Tape::Dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng.Bernoulli(rate) ? 0.0 : keep_scale;
    out[i] = x[i] * mask[i];
  }
  ImplPtr pa = Impl(x);
  return Record(x.shape(), std::move(out), {pa},
                [pa, mask = std::move(mask)](const detail::TensorImpl&, std::span<const double> g,
                                             GradBuffer& grads) {
                  auto ga = grads.For(pa);
                  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * mask[i];
                });
}

Tensor Tape::EmbeddingLookup(const Tensor& table, std::span<const std::size_t> ids) {
  RequireRank(table, 2, "embedding_lookup");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  std::vector<double> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= vocab) {
      throw IndexError("embedding_lookup: id " + std::to_string(rows[i]) + " >= table size " +
                       std::to_string(vocab));
    }
    std::copy_n(table.data().begin() + rows[i] * d, d, out.begin() + i * d);
  }
  ImplPtr pt = Impl(table);
  const std::size_t n = rows.size();
  return Record({n, d}, std::move(out), {pt},
                [pt, rows = std::move(rows), d](const detail::TensorImpl&, std::span<const double> g,
                                                GradBuffer& grads) {
                  auto gt = grads.For(pt);
                  for (std::size_t i = 0; i < rows.size(); ++i)
                    for (std::size_t j = 0; j < d; ++j) gt[rows[i] * d + j] += g[i * d + j];
                });
}

Tensor Tape::BceLoss(const Tensor& probs, const Tensor& targets, const Tensor& mask) {
  RequireSameShape(probs, targets, "bce_loss");
  RequireSameShape(probs, mask, "bce_loss");
  const std::size_t n = probs.size();
  double count = 0.0;
  for (std::size_t i = 0; i < n; ++i) count += mask[i];
  double total = 0.0;
  std::vector<double> clamped(n);
  for (std::size_t i = 0; i < n; ++i) {
    clamped[i] = std::clamp(probs[i], kProbEpsilon, 1.0 - kProbEpsilon);
    if (mask[i] == 0.0) continue;
    total -= mask[i] * (targets[i] * std::log(clamped[i]) + (1.0 - targets[i]) * std::log(1.0 - clamped[i]));
  }
  const double loss = count > 0.0 ? total / count : 0.0;
  ImplPtr pp = Impl(probs), pt = Impl(targets), pm = Impl(mask);
  return Record({}, {loss}, {pp},
                [pp, pt, pm, clamped = std::move(clamped), count](const detail::TensorImpl&,
                                                                  std::span<const double> g, GradBuffer& grads) {
                  auto gp = grads.For(pp);
                  if (count == 0.0) return;
                  for (std::size_t i = 0; i < gp.size(); ++i) {
                    const double m = pm->data[i], t = pt->data[i], p = clamped[i];
                    if (m == 0.0) continue;
                    gp[i] += g[0] * -m * (t / p - (1.0 - t) / (1.0 - p)) / count;
                  }
                });
}

void Tape::Backward(const Tensor& loss) {
  if (consumed_) throw ArgumentError("backward: tape already consumed; run a new forward pass");
  if (!loss.defined() || loss.size() != 1) {
    throw ArgumentError("backward: loss must be a scalar, got " +
                        (loss.defined() ? ShapeString(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad()) throw ArgumentError("backward: loss does not depend on any parameter");
  if (nodes_.empty() && loss.impl_->is_intermediate) throw ArgumentError("backward: empty tape");
  consumed_ = true;

  GradBuffer grads;
  grads.For(loss.impl_)[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const std::vector<double>* upstream = grads.Find(it->output.get());
    if (upstream == nullptr) continue;
    // Map nodes are stable under insertion, so `upstream` stays valid.
    it->backward(*it->output, *upstream, grads);
  }
  nodes_.clear();
}

}  // namespace gain
