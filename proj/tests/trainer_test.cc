#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gain/errors.h"
#include "gain/gradcheck.h"
#include "gain/synth.h"
#include "gain/trainer.h"

namespace gain {
namespace {

struct TwoHopSetup {
  std::vector<Document> docs;
  RelationMap relations = TwoHopRelations();
  Vocab vocab;
  ModelConfig model;
  std::vector<PreparedDoc> prepared;

  explicit TwoHopSetup(std::size_t n, double dropout = 0.0) {
    TwoHopOptions opts;
    opts.num_docs = n;
    Rng rng(21);
    docs = GenerateTwoHop(opts, rng);
    vocab = BuildVocab(docs, relations);
    model = ToyConfig(vocab.words.size(), vocab.types.size(), relations.size());
    model.activation = Activation::kRelu;
    model.dropout = dropout;
    prepared = Prepare(docs, vocab, model);
  }
};

TrainConfig Quick(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 2;
  c.learning_rate = 1e-2;
  c.seed = 4;
  return c;
}

std::vector<double> Flatten(const ParamStore& params) {
  std::vector<double> out;
  for (const auto& [name, t] : params) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

TEST(TrainConfig, JsonRoundTripAndRejection) {
  TrainConfig c;
  c.batch_size = 3;
  c.learning_rate = 0.25;
  c.patience = 2;
  c.seed = 123456789012345ULL;
  EXPECT_EQ(TrainConfig::FromJson(c.ToJson()), c);
  EXPECT_THROW(TrainConfig::FromJson(R"({"batchsize": 3})"), ConfigError);
  EXPECT_THROW(TrainConfig::FromJson(R"({"batch_size": 0})").Validate(), ConfigError);
  RunConfig run;
  run.model.gcn_layers = 3;
  run.train.epochs = 7;
  const RunConfig back = RunConfig::FromJson(run.ToJson());
  EXPECT_EQ(back.model, run.model);
  EXPECT_EQ(back.train, run.train);
  EXPECT_THROW(RunConfig::FromJson(R"({"optim": {}})"), ConfigError);
  EXPECT_EQ(RunConfig::FromJson("{}").train, TrainConfig());
}

TEST(RunLog, BestEvalPrefersEarliestMaximum) {
  RunLog log;
  EXPECT_FALSE(log.BestEval());
  log.evals = {{1, 0, 0.5, 0.2, 0.3}, {2, 1, 0.5, 0.4, 0.6}, {3, 2, 0.5, 0.5, 0.6}};
  EXPECT_EQ(log.BestEval(), 1u);
}

TEST(Trainer, StepsPerEpochAndLog) {
  TwoHopSetup s(3);
  Rng init(1);
  GainModel model(s.model, init);
  const TrainResult r = Train(model, s.prepared, {}, nullptr, {}, Quick(2));
  ASSERT_EQ(r.log.steps.size(), 4u);
  EXPECT_EQ(r.log.steps[0].docs, 2u);
  EXPECT_EQ(r.log.steps[1].docs, 1u);
  EXPECT_EQ(r.log.steps[3].epoch, 1u);
  EXPECT_EQ(r.log.step_seconds.size(), 4u);
  EXPECT_TRUE(r.log.evals.empty());
  EXPECT_FALSE(r.best_eval);
  EXPECT_EQ(Flatten(r.best_params), Flatten(model.params()));
  const std::string jsonl = r.log.ToJsonl();
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 4);
  EXPECT_EQ(jsonl.find("seconds"), std::string::npos);
}

TEST(Trainer, IdenticalRunsAreBitIdentical) {
  TwoHopSetup s(4, 0.3);
  const FactIndex index(s.docs, s.relations);
  auto run = [&] {
    Rng init(9);
    GainModel model(s.model, init);
    TrainConfig c = Quick(3);
    return Train(model, s.prepared, s.prepared, &index, {}, c);
  };
  const TrainResult a = run(), b = run();
  EXPECT_EQ(a.log.ToJsonl(), b.log.ToJsonl());
  EXPECT_EQ(Flatten(a.best_params), Flatten(b.best_params));
  EXPECT_EQ(a.log.evals.size(), 3u);
}

TEST(Trainer, BatchGradientIsSumOfDocumentGradients) {
  TwoHopSetup s(3);
  Rng init(2);
  GainModel model(s.model, init);
  const TrainConfig c = Quick(1);
  const std::vector<std::size_t> both = {0, 2};
  ZeroGrads(model.params());
  const double loss = AccumulateBatch(model, s.prepared, both, c, 0);
  std::map<std::string, std::vector<double>> together;
  for (auto& [name, t] : model.params()) together[name].assign(t.mutable_grad().begin(), t.mutable_grad().end());

  double separate_loss = 0.0;
  std::map<std::string, std::vector<double>> summed;
  for (std::size_t idx : both) {
    ZeroGrads(model.params());
    const std::vector<std::size_t> one = {idx};
    separate_loss += AccumulateBatch(model, s.prepared, one, c, 0);
    for (auto& [name, t] : model.params()) {
      auto& acc = summed[name];
      acc.resize(t.size(), 0.0);
      for (std::size_t i = 0; i < t.size(); ++i) acc[i] += t.mutable_grad()[i];
    }
  }
  EXPECT_NEAR(loss, separate_loss, 1e-12);
  for (const auto& [name, g] : together)
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(g[i], summed[name][i], 1e-12) << name << "[" << i << "]";
}

TEST(Trainer, NonFiniteLossNamesTheDocument) {
  TwoHopSetup s(2);
  Rng init(2);
  GainModel model(s.model, init);
  model.params().at("classifier.out.bias").mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  const std::vector<std::size_t> batch = {1};
  try {
    AccumulateBatch(model, s.prepared, batch, Quick(1), 0);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find(s.docs[1].title), std::string::npos) << e.what();
  }
}

TEST(Trainer, PredictScoresEveryPairAndThresholdOneKeepsNothing) {
  TwoHopSetup s(2);
  Rng init(2);
  GainModel model(s.model, init);
  const PredictionSet pred = Predict(model, s.prepared);
  std::size_t expected = 0;
  for (const auto& d : s.prepared) expected += d.encoded.pairs.size() * s.relations.size();
  EXPECT_EQ(pred.size(), expected);
  const FactIndex index(s.docs, s.relations);
  EXPECT_EQ(F1(pred, index.gold(), 1.0).f1, 0.0);
  EXPECT_EQ(Thresholded(pred, 1.0).size(), 0u);
}

TEST(Trainer, CheckpointMetadataRoundTrip) {
  TwoHopSetup s(2);
  TrainConfig c = Quick(5);
  const CheckpointInfo info = ParseCheckpointMetadata(CheckpointMetadata(s.model, c, s.vocab));
  EXPECT_EQ(info.model, s.model);
  EXPECT_EQ(info.train, c);
  EXPECT_EQ(info.vocab.words, s.vocab.words);
  EXPECT_EQ(info.vocab.relations.names(), s.relations.names());
  EXPECT_THROW(ParseCheckpointMetadata("not json"), LoadError);
}

}  // namespace
}  // namespace gain
