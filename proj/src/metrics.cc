#include "gain/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "gain/errors.h"

namespace gain {

namespace {

std::vector<ScoredFact> SortedByScore(const PredictionSet& pred) {
  std::vector<ScoredFact> sorted = pred.entries();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredFact& a, const ScoredFact& b) { return a.score > b.score; });
  return sorted;
}

Prf FromCounts(std::size_t correct, std::size_t predicted, std::size_t gold) {
  Prf out;
  if (predicted == 0 && gold == 0) return {1.0, 1.0, 1.0};
  if (predicted > 0) out.precision = static_cast<double>(correct) / static_cast<double>(predicted);
  if (gold > 0) out.recall = static_cast<double>(correct) / static_cast<double>(gold);
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

PredictionSet Without(const PredictionSet& pred, const GoldSet& exclude) {
  PredictionSet out;
  for (const auto& e : pred.entries())
    if (!exclude.contains(e.key)) out.Add(e.key, e.score);
  return out;
}

GoldSet Minus(const GoldSet& a, const GoldSet& b) {
  GoldSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

void PredictionSet::Add(const FactKey& key, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError("prediction score " + std::to_string(score) + " outside [0, 1]");
  }
  if (!keys_.insert(key).second) {
    throw ValidationError("duplicate prediction (doc " + std::to_string(key.doc) + ", " + std::to_string(key.head) +
                          ", " + std::to_string(key.tail) + ", r" + std::to_string(key.relation) + ")");
  }
  entries_.push_back({key, score});
}

TrainSignatures BuildTrainSignatures(std::span<const Document> train, const RelationMap& relations) {
  TrainSignatures out;
  for (const Document& doc : train) {
    for (const Fact& fact : doc.gold_facts) {
      for (const Mention& h : doc.entities.at(fact.head).mentions)
        for (const Mention& t : doc.entities.at(fact.tail).mentions)
          out.emplace(h.surface, t.surface, relations.Name(fact.relation));
    }
  }
  return out;
}

FactIndex::FactIndex(std::span<const Document> docs, const RelationMap& relations)
    : relation_names_(relations.names()) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs[d];
    sentence_sets_.push_back(EntitySentenceSets(doc));
    std::vector<std::set<std::string>> names;
    for (const Entity& e : doc.entities) {
      std::set<std::string> n;
      for (const Mention& m : e.mentions) n.insert(m.surface);
      names.push_back(std::move(n));
    }
    names_.push_back(std::move(names));
    for (const Fact& f : doc.gold_facts) gold_.insert({d, f.head, f.tail, f.relation});
  }
}

const std::vector<std::size_t>& FactIndex::SentenceSet(std::size_t doc, std::size_t entity) const {
  if (doc >= sentence_sets_.size() || entity >= sentence_sets_[doc].size()) {
    throw IndexError("fact index has no entity " + std::to_string(entity) + " in document " + std::to_string(doc));
  }
  return sentence_sets_[doc][entity];
}

bool FactIndex::IsIntra(std::size_t doc, std::size_t head, std::size_t tail) const {
  const auto& a = SentenceSet(doc, head);
  const auto& b = SentenceSet(doc, tail);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) ++i;
    else ++j;
  }
  return false;
}

bool FactIndex::InTrain(const FactKey& key, const TrainSignatures& train) const {
  const std::string& rel = relation_names_.at(key.relation);
  for (const auto& h : names_.at(key.doc).at(key.head))
    for (const auto& t : names_.at(key.doc).at(key.tail))
      if (train.contains({h, t, rel})) return true;
  return false;
}

GoldSet FactIndex::TrainOverlap(const TrainSignatures& train) const {
  GoldSet out;
  for (const FactKey& k : gold_)
    if (InTrain(k, train)) out.insert(k);
  return out;
}

GoldSet Thresholded(const PredictionSet& pred, double threshold) {
  GoldSet out;
  for (const auto& e : pred.entries())
    if (e.score > threshold) out.insert(e.key);
  return out;
}

Prf ScoreSets(const GoldSet& predicted, const GoldSet& gold) {
  std::size_t correct = 0;
  for (const FactKey& k : predicted) correct += gold.contains(k);
  return FromCounts(correct, predicted.size(), gold.size());
}

Prf F1(const PredictionSet& pred, const GoldSet& gold, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ArgumentError("threshold must lie in [0, 1]");
  return ScoreSets(Thresholded(pred, threshold), gold);
}

Prf IgnF1(const PredictionSet& pred, const GoldSet& gold, const GoldSet& exclude, double threshold) {
  return F1(Without(pred, exclude), Minus(gold, exclude), threshold);
}

AucResult Auc(const PredictionSet& pred, const GoldSet& gold) {
  AucResult out;
  if (gold.empty()) {
    out.no_gold = true;
    return out;
  }
  const auto sorted = SortedByScore(pred);
  const double total = static_cast<double>(gold.size());
  std::size_t tp = 0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      tp += gold.contains(sorted[j].key);
      ++j;
    }
    const double recall = static_cast<double>(tp) / total;
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    out.auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return out;
}

AucResult IgnAuc(const PredictionSet& pred, const GoldSet& gold, const GoldSet& exclude) {
  return Auc(Without(pred, exclude), Minus(gold, exclude));
}

IntraInter IntraInterF1(const PredictionSet& pred, const FactIndex& index, double threshold) {
  GoldSet gold_intra, gold_inter, pred_intra, pred_inter;
  for (const FactKey& k : index.gold()) (index.IsIntra(k.doc, k.head, k.tail) ? gold_intra : gold_inter).insert(k);
  for (const FactKey& k : Thresholded(pred, threshold))
    (index.IsIntra(k.doc, k.head, k.tail) ? pred_intra : pred_inter).insert(k);
  return {ScoreSets(pred_intra, gold_intra), ScoreSets(pred_inter, gold_inter)};
}

GoldSet InferConsidered(const GoldSet& gold) {
  // Per document: outgoing facts by head, and the set of linked (h, t) pairs.
  std::map<std::size_t, std::map<std::size_t, std::vector<FactKey>>> by_head;
  for (const FactKey& k : gold) by_head[k.doc][k.head].push_back(k);

  GoldSet out;
  for (const FactKey& direct : gold) {
    const auto& heads = by_head[direct.doc];
    auto first = heads.find(direct.head);
    if (first == heads.end()) continue;
    for (const FactKey& hop1 : first->second) {
      const std::size_t o = hop1.tail;
      if (o == direct.tail) continue;
      auto second = heads.find(o);
      if (second == heads.end()) continue;
      for (const FactKey& hop2 : second->second) {
        if (hop2.tail != direct.tail) continue;
        out.insert(direct);
        out.insert(hop1);
        out.insert(hop2);
      }
    }
  }
  return out;
}

InferResult InferF1(const PredictionSet& pred, const GoldSet& gold, double threshold) {
  InferResult out;
  const GoldSet considered = InferConsidered(gold);
  if (considered.empty()) return out;
  out.defined = true;
  GoldSet predicted;
  for (const FactKey& k : Thresholded(pred, threshold))
    if (considered.contains(k)) predicted.insert(k);
  out.prf = ScoreSets(predicted, considered);
  return out;
}

Prf RelationF1(const PredictionSet& pred, const GoldSet& gold, std::size_t relation, double threshold) {
  GoldSet g, p;
  for (const FactKey& k : gold)
    if (k.relation == relation) g.insert(k);
  for (const FactKey& k : Thresholded(pred, threshold))
    if (k.relation == relation) p.insert(k);
  return ScoreSets(p, g);
}

ThresholdChoice BestThreshold(const PredictionSet& pred, const GoldSet& gold) {
  ThresholdChoice best;
  best.f1 = FromCounts(0, 0, gold.size()).f1;
  const auto sorted = SortedByScore(pred);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      tp += gold.contains(sorted[j].key);
      ++j;
    }
    const double upper = sorted[i].score;
    const double lower = j < sorted.size() ? sorted[j].score : 0.0;
    if (upper == 0.0) break;  // zero scores can never pass a strict threshold
    double cut = 0.5 * (upper + lower);
    if (!(cut > lower && cut < upper)) cut = lower;
    const double f1 = FromCounts(tp, j, gold.size()).f1;
    if (f1 > best.f1) best = {cut, f1};
    i = j;
  }
  return best;
}

MetricReport Evaluate(const PredictionSet& pred, const FactIndex& index, const TrainSignatures& train,
                      std::optional<double> threshold) {
  MetricReport r;
  const GoldSet& gold = index.gold();
  if (threshold) {
    r.threshold = *threshold;
  } else {
    r.threshold = BestThreshold(pred, gold).threshold;
    r.threshold_selected = true;
  }
  const GoldSet overlap = index.TrainOverlap(train);
  r.f1 = F1(pred, gold, r.threshold);
  r.ign_f1 = IgnF1(pred, gold, overlap, r.threshold);
  r.auc = Auc(pred, gold);
  r.ign_auc = IgnAuc(pred, gold, overlap);
  r.intra_inter = IntraInterF1(pred, index, r.threshold);
  r.infer = InferF1(pred, gold, r.threshold);
  return r;
}

std::string FormatReport(const MetricReport& r) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  auto prf = [&](const char* name, const Prf& p) {
    out << name << "_f1 " << p.f1 << "\n"
        << name << "_precision " << p.precision << "\n"
        << name << "_recall " << p.recall << "\n";
  };
  out << "threshold " << r.threshold << (r.threshold_selected ? " selected" : " given") << "\n";
  prf("all", r.f1);
  prf("ign", r.ign_f1);
  out << "auc " << r.auc.auc << (r.auc.no_gold ? " no_gold" : "") << "\n";
  out << "ign_auc " << r.ign_auc.auc << (r.ign_auc.no_gold ? " no_gold" : "") << "\n";
  prf("intra", r.intra_inter.intra);
  prf("inter", r.intra_inter.inter);
  prf("infer", r.infer.prf);
  out << "infer_defined " << (r.infer.defined ? "true" : "false") << "\n";
  return out.str();
}

void WritePredictions(const std::filesystem::path& path, const PredictionSet& pred, std::span<const Document> docs,
                      const RelationMap& relations) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& e : pred.entries()) {
    nlohmann::json rec = {{"title", docs[e.key.doc].title},
                          {"h_idx", e.key.head},
                          {"t_idx", e.key.tail},
                          {"r", relations.Name(e.key.relation)},
                          {"score", e.score}};
    out << rec.dump() << "\n";
  }
}

}  // namespace gain
