#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gain/docred.h"

namespace gain {

// (document index, head entity, tail entity, relation id).
struct FactKey {
  std::size_t doc = 0;
  std::size_t head = 0;
  std::size_t tail = 0;
  std::size_t relation = 0;

  auto operator<=>(const FactKey&) const = default;
};

using GoldSet = std::set<FactKey>;

struct ScoredFact {
  FactKey key;
  double score = 0.0;
};

// Scored triples with unique keys and scores in [0, 1].
class PredictionSet {
 public:
  // Throws ValidationError on a duplicate key or an out-of-range score.
  void Add(const FactKey& key, double score);
  const std::vector<ScoredFact>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<ScoredFact> entries_;
  std::set<FactKey> keys_;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// (head mention name, tail mention name, relation name) triples of the
// training split. A dev/test fact is "in train" when any pair of its head
// and tail mention names appears here with the same relation.
using TrainSignatures = std::set<std::tuple<std::string, std::string, std::string>>;

TrainSignatures BuildTrainSignatures(std::span<const Document> train, const RelationMap& relations);

// Gold facts and per-entity sentence/name sets for one evaluated split.
class FactIndex {
 public:
  FactIndex(std::span<const Document> docs, const RelationMap& relations);

  const GoldSet& gold() const { return gold_; }
  std::size_t num_docs() const { return sentence_sets_.size(); }
  const std::vector<std::size_t>& SentenceSet(std::size_t doc, std::size_t entity) const;
  // S_h and S_t intersect.
  bool IsIntra(std::size_t doc, std::size_t head, std::size_t tail) const;
  bool InTrain(const FactKey& key, const TrainSignatures& train) const;
  // Gold keys whose fact is in train.
  GoldSet TrainOverlap(const TrainSignatures& train) const;

 private:
  GoldSet gold_;
  std::vector<std::vector<std::vector<std::size_t>>> sentence_sets_;
  std::vector<std::vector<std::set<std::string>>> names_;
  std::vector<std::string> relation_names_;
};

// Predictions with score strictly above `threshold`.
GoldSet Thresholded(const PredictionSet& pred, double threshold);

// Empty-set conventions: no predictions with gold -> 0; both empty -> 1;
// predictions without gold -> 0.
Prf ScoreSets(const GoldSet& predicted, const GoldSet& gold);

Prf F1(const PredictionSet& pred, const GoldSet& gold, double threshold);

// Gold facts in `exclude` are dropped from gold, and predictions on those
// keys are dropped from the predictions, before scoring.
Prf IgnF1(const PredictionSet& pred, const GoldSet& gold, const GoldSet& exclude, double threshold);

struct AucResult {
  double auc = 0.0;
  // Set when gold is empty and the area is reported as 0.
  bool no_gold = false;
};

// Step-interpolated area under the precision-recall curve. Predictions are
// ranked by score; equal scores enter as one block.
AucResult Auc(const PredictionSet& pred, const GoldSet& gold);
AucResult IgnAuc(const PredictionSet& pred, const GoldSet& gold, const GoldSet& exclude);

struct IntraInter {
  Prf intra;
  Prf inter;
};

IntraInter IntraInterF1(const PredictionSet& pred, const FactIndex& index, double threshold);

// Gold facts taking part in some (h, r1, o), (o, r2, t), (h, r3, t) pattern.
GoldSet InferConsidered(const GoldSet& gold);

struct InferResult {
  Prf prf;
  // False when no gold fact takes part in a pattern; prf is then all zero.
  bool defined = false;
};

// Scores predictions and gold restricted to the considered gold keys.
InferResult InferF1(const PredictionSet& pred, const GoldSet& gold, double threshold);

// F1 restricted to one relation id.
Prf RelationF1(const PredictionSet& pred, const GoldSet& gold, std::size_t relation, double threshold);

struct ThresholdChoice {
  double threshold = 1.0;
  double f1 = 0.0;
};

// Threshold maximizing F1. Candidates sit halfway between consecutive
// distinct scores (and halfway below the lowest one); ties go to the higher
// threshold. Threshold 1.0 (no predictions) is the fallback.
ThresholdChoice BestThreshold(const PredictionSet& pred, const GoldSet& gold);

struct MetricReport {
  double threshold = 0.0;
  bool threshold_selected = false;
  Prf f1;
  Prf ign_f1;
  AucResult auc;
  AucResult ign_auc;
  IntraInter intra_inter;
  InferResult infer;
};

// Selects the threshold on `pred` when none is given.
MetricReport Evaluate(const PredictionSet& pred, const FactIndex& index, const TrainSignatures& train,
                      std::optional<double> threshold);

// Structured text, one "key value" per line.
std::string FormatReport(const MetricReport& report);

// Line-delimited {title, h_idx, t_idx, r, score} records.
void WritePredictions(const std::filesystem::path& path, const PredictionSet& pred, std::span<const Document> docs,
                      const RelationMap& relations);

}  // namespace gain
