#include <gtest/gtest.h>

#include <cmath>

#include "gain/errors.h"
#include "gain/tape.h"
#include "test_util.h"

namespace gain {
namespace {

using testing::MaxGradError;
using testing::RandomTensor;

constexpr int kTrials = 20;
constexpr double kTol = 1e-4;

// Reduces any output to a scalar through a fixed random weighting, so every
// output element contributes a distinct upstream gradient.
Tensor Reduce(Tape& tape, const Tensor& out, std::uint64_t seed) {
  Rng rng(seed);
  Tensor w = RandomTensor(out.shape(), rng, false, -1.0, 1.0);
  return tape.Sum(tape.Mul(out, w));
}

void CheckOp(const char* name, const std::function<Tensor(Tape&, std::vector<Tensor>&)>& op,
             const std::vector<Shape>& shapes) {
  Rng rng(42);
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<Tensor> inputs;
    for (const auto& s : shapes) inputs.push_back(RandomTensor(s, rng));
    const auto f = [&](Tape& tape, std::vector<Tensor>& in) { return Reduce(tape, op(tape, in), 1000 + trial); };
    EXPECT_LT(MaxGradError(f, inputs), kTol) << name << " trial " << trial;
  }
}

TEST(TapeGrad, MatMul) {
  CheckOp("matmul", [](Tape& t, auto& in) { return t.MatMul(in[0], in[1]); }, {{3, 4}, {4, 2}});
}

TEST(TapeGrad, ElementwiseOps) {
  CheckOp("add", [](Tape& t, auto& in) { return t.Add(in[0], in[1]); }, {{2, 3}, {2, 3}});
  CheckOp("sub", [](Tape& t, auto& in) { return t.Sub(in[0], in[1]); }, {{2, 3}, {2, 3}});
  CheckOp("mul", [](Tape& t, auto& in) { return t.Mul(in[0], in[1]); }, {{2, 3}, {2, 3}});
  CheckOp("abs", [](Tape& t, auto& in) { return t.Abs(in[0]); }, {{3, 3}});
  CheckOp("relu", [](Tape& t, auto& in) { return t.Relu(in[0]); }, {{3, 3}});
  CheckOp("tanh", [](Tape& t, auto& in) { return t.Tanh(in[0]); }, {{3, 3}});
  CheckOp("sigmoid", [](Tape& t, auto& in) { return t.Sigmoid(in[0]); }, {{3, 3}});
}

TEST(TapeGrad, LinearAndBroadcast) {
  CheckOp("linear", [](Tape& t, auto& in) { return t.Linear(in[0], in[1], in[2]); }, {{3, 4}, {4, 2}, {2}});
  CheckOp("broadcast", [](Tape& t, auto& in) { return t.AddRowBroadcast(in[0], in[1]); }, {{3, 2}, {2}});
  CheckOp("scale", [](Tape& t, auto& in) { return t.Scale(in[0], -1.5); }, {{2, 2}});
}

TEST(TapeGrad, ShapeOps) {
  CheckOp("transpose", [](Tape& t, auto& in) { return t.Transpose(in[0]); }, {{2, 5}});
  CheckOp("concat0", [](Tape& t, auto& in) { return t.Concat({in[0], in[1]}, 0); }, {{2, 3}, {1, 3}});
  CheckOp("concat1", [](Tape& t, auto& in) { return t.Concat({in[0], in[1]}, 1); }, {{2, 3}, {2, 1}});
  CheckOp("slice", [](Tape& t, auto& in) { return t.Slice(in[0], 1, 1, 3); }, {{3, 4}});
  CheckOp("reshape", [](Tape& t, auto& in) { return t.Reshape(in[0], {6}); }, {{2, 3}});
  CheckOp("mean", [](Tape& t, auto& in) { return t.Mean(in[0]); }, {{4, 3}});
  CheckOp("softmax", [](Tape& t, auto& in) { return t.Softmax(in[0]); }, {{5}});
}

TEST(TapeGrad, EmbeddingAndBce) {
  const std::vector<std::size_t> ids = {2, 0, 2};
  CheckOp("embedding", [&](Tape& t, auto& in) { return t.EmbeddingLookup(in[0], ids); }, {{3, 2}});

  Rng rng(5);
  for (int trial = 0; trial < kTrials; ++trial) {
    Tensor logits = RandomTensor({2, 3}, rng);
    Tensor targets({2, 3}, {1, 0, 1, 0, 0, 1});
    Tensor mask({2, 3}, {1, 1, 0, 1, 1, 1});
    const auto f = [&](Tape& t, std::vector<Tensor>& in) { return t.BceLoss(t.Sigmoid(in[0]), targets, mask); };
    EXPECT_LT(MaxGradError(f, {logits}), kTol);
  }
}

TEST(TapeGrad, MatMulSumGradientIsRowSumsOfB) {
  Rng rng(1);
  Tensor a = RandomTensor({2, 3}, rng);
  Tensor b = RandomTensor({3, 4}, rng, false);
  Tape tape;
  tape.Backward(tape.Sum(tape.MatMul(a, b)));
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      double row_sum = 0;
      for (std::size_t j = 0; j < 4; ++j) row_sum += b.at(k, j);
      EXPECT_NEAR(a.grad()[i * 3 + k], row_sum, 1e-12);
    }
  }
}

TEST(TapeGrad, RepeatedEmbeddingIdAccumulates) {
  Tensor table({3, 2}, {1, 2, 3, 4, 5, 6}, true);
  const std::vector<std::size_t> ids = {1, 1};
  Tape tape;
  tape.Backward(tape.Sum(tape.EmbeddingLookup(table, ids)));
  EXPECT_EQ(std::vector<double>(table.grad().begin(), table.grad().end()), (std::vector<double>{0, 0, 2, 2, 0, 0}));
}

TEST(TapeGrad, SigmoidBceGradientIsPMinusT) {
  Tensor logit({1}, {0.3}, true);
  Tensor target({1}, {1.0});
  Tensor mask({1}, {1.0});
  Tape tape;
  Tensor p = tape.Sigmoid(logit);
  tape.Backward(tape.BceLoss(p, target, mask));
  EXPECT_NEAR(logit.grad()[0], p[0] - 1.0, 1e-12);
}

TEST(TapeGrad, GradientsAccumulateAcrossTapes) {
  Tensor x({2}, {1.0, 2.0}, true);
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    tape.Backward(tape.Sum(tape.Scale(x, 3.0)));
  }
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 6.0);
}

TEST(Tape, ConstantsAreNotRecorded) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tape tape;
  Tensor c = tape.MatMul(a, a);
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_FALSE(c.requires_grad());
  EXPECT_DOUBLE_EQ(c.at(0, 0), 7.0);
}

TEST(Tape, SingleUse) {
  Tensor x({1}, {1.0}, true);
  Tape tape;
  Tensor loss = tape.Sum(tape.Mul(x, x));
  tape.Backward(loss);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.Backward(loss), ArgumentError);
}

TEST(Tape, BackwardRejectsBadLoss) {
  Tensor x({2}, {1.0, 2.0}, true);
  Tape tape;
  EXPECT_THROW(tape.Backward(tape.Scale(x, 2.0)), ArgumentError);
  Tape t2;
  EXPECT_THROW(t2.Backward(t2.Sum(Tensor({2}, {1.0, 2.0}))), ArgumentError);
}

TEST(Tape, ShapeErrors) {
  Tape tape;
  EXPECT_THROW(tape.MatMul(Tensor::Zeros({2, 3}), Tensor::Zeros({2, 3})), DimensionError);
  EXPECT_THROW(tape.Add(Tensor::Zeros({2}), Tensor::Zeros({3})), DimensionError);
  EXPECT_THROW(tape.Concat({Tensor::Zeros({2, 3}), Tensor::Zeros({3, 2})}, 0), DimensionError);
  EXPECT_THROW(tape.Concat(std::span<const Tensor>(), 0), ArgumentError);
  EXPECT_THROW(tape.Mean(Tensor::Zeros({0, 3})), ArgumentError);
  const std::vector<std::size_t> ids = {5};
  EXPECT_THROW(tape.EmbeddingLookup(Tensor::Zeros({3, 2}), ids), IndexError);
  EXPECT_THROW(Tensor({2, 2}, {1.0}), DimensionError);
}

TEST(Tape, ForwardValues) {
  Tape tape;
  Tensor s = tape.Softmax(Tensor::Vector({1000.0, 1000.0}));
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  Tensor sig = tape.Sigmoid(Tensor::Vector({-800.0, 0.0, 800.0}));
  EXPECT_DOUBLE_EQ(sig[0], 0.0);
  EXPECT_DOUBLE_EQ(sig[1], 0.5);
  EXPECT_DOUBLE_EQ(sig[2], 1.0);
  Tensor m = tape.Mean(Tensor::Matrix({{1, 2}, {3, 6}}));
  EXPECT_EQ(m.shape(), (Shape{2}));
  EXPECT_DOUBLE_EQ(m[1], 4.0);
  Tensor bce = tape.BceLoss(Tensor::Vector({1.0}), Tensor::Vector({0.0}), Tensor::Vector({1.0}));
  EXPECT_DOUBLE_EQ(bce.item(), -std::log(1.0 - (1.0 - Tape::kProbEpsilon)));
  EXPECT_DOUBLE_EQ(tape.BceLoss(Tensor::Vector({0.3}), Tensor::Vector({0.0}), Tensor::Vector({0.0})).item(), 0.0);
}

TEST(Tape, ReluAndAbsAtZeroHaveZeroGradient) {
  Tensor x({2}, {0.0, 0.0}, true);
  Tape tape;
  tape.Backward(tape.Sum(tape.Add(tape.Relu(x), tape.Abs(x))));
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.0);
}

TEST(Tape, Dropout) {
  Rng rng(3);
  Tensor x = Tensor::Full({100, 10}, 1.0);
  Tape tape;
  EXPECT_EQ(tape.Dropout(x, 0.5, false, rng).id(), x.id());
  EXPECT_EQ(tape.Dropout(x, 0.0, true, rng).id(), x.id());
  Tensor d = tape.Dropout(x, 0.5, true, rng);
  std::size_t zeros = 0;
  for (double v : d.data()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    zeros += v == 0.0;
  }
  EXPECT_GT(zeros, 400u);
  EXPECT_LT(zeros, 600u);
  EXPECT_THROW(tape.Dropout(x, 1.0, true, rng), ArgumentError);

  Rng a(9), b(9);
  Tape t1, t2;
  Tensor d1 = t1.Dropout(x, 0.3, true, a), d2 = t2.Dropout(x, 0.3, true, b);
  EXPECT_TRUE(std::equal(d1.data().begin(), d1.data().end(), d2.data().begin()));
}

TEST(Tape, DropoutGradientFollowsMask) {
  Rng rng(4);
  Tensor x = RandomTensor({4, 4}, rng);
  Tape tape;
  Rng drop(8);
  Tensor d = tape.Dropout(x, 0.5, true, drop);
  tape.Backward(tape.Sum(d));
  for (std::size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], d[i] == 0.0 ? 0.0 : 2.0);
}

}  // namespace
}  // namespace gain
