#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gain/checkpoint.h"
#include "gain/docred.h"
#include "gain/encoding.h"
#include "gain/metrics.h"
#include "gain/model.h"
#include "gain/optimizer.h"
#include "gain/vocab.h"

namespace gain {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  // Evaluate on dev every this many epochs.
  std::size_t eval_every = 1;
  // Evaluations without dev Ign F1 improvement before stopping; 0 disables.
  std::size_t patience = 0;
  double neg_ratio = 0.25;
  // Predictions scoring below this are not stored (memory bound on big splits).
  double min_score = 0.0;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
  std::string ToJson() const;
  static TrainConfig FromJson(const std::string& text);
};

// Config file form: {"model": {...}, "train": {...}}, both optional.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;

  std::string ToJson() const;
  static RunConfig FromJson(const std::string& text);
  static RunConfig FromFile(const std::filesystem::path& path);
};

struct PreparedDoc {
  EncodedDoc encoded;
  DocGraphs graphs;
};

std::vector<PreparedDoc> Prepare(std::span<const Document> docs, const Vocab& vocab, const ModelConfig& config);

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  std::size_t docs = 0;
  // Mean per-document loss over the batch.
  double loss = 0.0;
};

struct EvalRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double threshold = 0.0;
  double f1 = 0.0;
  double ign_f1 = 0.0;
  double auc = 0.0;
  double ign_auc = 0.0;
};

struct RunLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  // Seconds since training start, one per step. Kept out of ToJsonl so the
  // log itself is reproducible.
  std::vector<double> step_seconds;

  // One JSON record per line, steps and evals interleaved in step order.
  std::string ToJsonl() const;
  std::string TimingsJsonl() const;
  // Eval with the highest dev Ign F1 (earliest on ties).
  std::optional<std::size_t> BestEval() const;
};

struct TrainResult {
  ParamStore best_params;
  RunLog log;
  std::optional<std::size_t> best_eval;
};

// Adds the gradients of every document in `batch` to the parameter grads and
// returns the summed loss. Throws NumericError naming the document when a
// loss is not finite.
double AccumulateBatch(const GainModel& model, std::span<const PreparedDoc> docs, std::span<const std::size_t> batch,
                       const TrainConfig& config, std::size_t epoch);

// Scores every ordered pair and relation of every document.
PredictionSet Predict(const GainModel& model, std::span<const PreparedDoc> docs, double min_score = 0.0);

// Keeps the parameters with the best dev Ign F1; without dev documents the
// final parameters are kept.
TrainResult Train(GainModel& model, std::span<const PreparedDoc> train, std::span<const PreparedDoc> dev,
                  const FactIndex* dev_index, const TrainSignatures& signatures, const TrainConfig& config,
                  std::ostream* progress = nullptr);

// Checkpoint metadata: {"model": ..., "train": ..., "vocab": ...}.
std::string CheckpointMetadata(const ModelConfig& model, const TrainConfig& train, const Vocab& vocab);
struct CheckpointInfo {
  ModelConfig model;
  TrainConfig train;
  Vocab vocab;
};
CheckpointInfo ParseCheckpointMetadata(const std::string& metadata);

}  // namespace gain
