#include "gain/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gain/errors.h"
#include "json.hpp"

namespace gain {

using nlohmann::json;

namespace {

// Shortest text that reads back to the same double.
std::string Exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json ParseObject(const std::string& text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
  return j;
}

std::vector<std::size_t> AllPairs(const EncodedDoc& doc) {
  std::vector<std::size_t> idx(doc.pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

void TrainConfig::Validate() const {
  if (batch_size == 0) throw ConfigError("train config: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("train config: weight_decay must be non-negative");
  if (epochs == 0) throw ConfigError("train config: epochs must be positive");
  if (eval_every == 0) throw ConfigError("train config: eval_every must be positive");
  if (!(neg_ratio > 0.0)) throw ConfigError("train config: neg_ratio must be positive");
  if (!(min_score >= 0.0 && min_score <= 1.0)) throw ConfigError("train config: min_score must lie in [0, 1]");
}

std::string TrainConfig::ToJson() const {
  json j;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["weight_decay"] = weight_decay;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["eval_every"] = eval_every;
  j["patience"] = patience;
  j["neg_ratio"] = neg_ratio;
  j["min_score"] = min_score;
  return j.dump(2);
}

TrainConfig TrainConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "train config");
  TrainConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "eval_every") c.eval_every = v.get<std::size_t>();
      else if (key == "patience") c.patience = v.get<std::size_t>();
      else if (key == "neg_ratio") c.neg_ratio = v.get<double>();
      else if (key == "min_score") c.min_score = v.get<double>();
      else throw ConfigError("train config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("train config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

std::string RunConfig::ToJson() const {
  json j;
  j["model"] = json::parse(model.ToJson());
  j["train"] = json::parse(train.ToJson());
  return j.dump(2);
}

RunConfig RunConfig::FromJson(const std::string& text) {
  const json j = ParseObject(text, "config");
  RunConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "model") c.model = ModelConfig::FromJson(it.value().dump());
    else if (it.key() == "train") c.train = TrainConfig::FromJson(it.value().dump());
    else throw ConfigError("config: unknown section '" + it.key() + "' (expected 'model' or 'train')");
  }
  return c;
}

RunConfig RunConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return FromJson(buf.str());
}

std::vector<PreparedDoc> Prepare(std::span<const Document> docs, const Vocab& vocab, const ModelConfig& config) {
  std::vector<PreparedDoc> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    PreparedDoc p;
    p.encoded = EncodeDocument(doc, vocab);
    p.graphs = BuildDocGraphs(p.encoded, config);
    out.push_back(std::move(p));
  }
  return out;
}

std::string RunLog::ToJsonl() const {
  std::ostringstream out;
  std::size_t e = 0;
  auto flush_evals = [&](std::size_t upto) {
    for (; e < evals.size() && evals[e].step <= upto; ++e) {
      const EvalRecord& r = evals[e];
      out << "{\"kind\":\"eval\",\"step\":" << r.step << ",\"epoch\":" << r.epoch
          << ",\"threshold\":" << Exact(r.threshold) << ",\"f1\":" << Exact(r.f1) << ",\"ign_f1\":" << Exact(r.ign_f1)
          << ",\"auc\":" << Exact(r.auc) << ",\"ign_auc\":" << Exact(r.ign_auc) << "}\n";
    }
  };
  for (const StepRecord& s : steps) {
    flush_evals(s.step - 1);
    out << "{\"kind\":\"step\",\"step\":" << s.step << ",\"epoch\":" << s.epoch << ",\"docs\":" << s.docs
        << ",\"loss\":" << Exact(s.loss) << "}\n";
  }
  flush_evals(static_cast<std::size_t>(-1));
  return out.str();
}

std::string RunLog::TimingsJsonl() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < steps.size() && i < step_seconds.size(); ++i)
    out << "{\"step\":" << steps[i].step << ",\"seconds\":" << Exact(step_seconds[i]) << "}\n";
  return out.str();
}

std::optional<std::size_t> RunLog::BestEval() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < evals.size(); ++i)
    if (!best || evals[i].ign_f1 > evals[*best].ign_f1) best = i;
  return best;
}

double AccumulateBatch(const GainModel& model, std::span<const PreparedDoc> docs, std::span<const std::size_t> batch,
                       const TrainConfig& config, std::size_t epoch) {
  const Rng base(config.seed);
  double total = 0.0;
  for (std::size_t idx : batch) {
    const PreparedDoc& doc = docs[idx];
    Rng rng = base.Fork(epoch + 1, idx);
    const auto pairs = SamplePairs(doc.encoded, config.neg_ratio, rng, true);
    if (pairs.empty()) continue;
    Tape tape;
    ForwardOutput out = model.Forward(tape, doc.encoded, doc.graphs, pairs, true, rng);
    const double loss = out.loss.item();
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite loss " + Exact(loss) + " on document '" + doc.encoded.title + "' (index " +
                         std::to_string(idx) + ", epoch " + std::to_string(epoch) + ")");
    }
    tape.Backward(out.loss);
    total += loss;
  }
  return total;
}

PredictionSet Predict(const GainModel& model, std::span<const PreparedDoc> docs, double min_score) {
  PredictionSet pred;
  Rng unused(0);
  const std::size_t r = model.config().num_relations;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const EncodedDoc& doc = docs[d].encoded;
    if (doc.pairs.empty()) continue;
    Tape tape;
    const auto pairs = AllPairs(doc);
    ForwardOutput out = model.Forward(tape, doc, docs[d].graphs, pairs, false, unused);
    const auto probs = out.probs.data();
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const CandidatePair& p = doc.pairs[pairs[j]];
      for (std::size_t k = 0; k < r; ++k) {
        const double s = probs[j * r + k];
        if (s >= min_score) pred.Add({d, p.head, p.tail, k}, s);
      }
    }
  }
  return pred;
}

TrainResult Train(GainModel& model, std::span<const PreparedDoc> train, std::span<const PreparedDoc> dev,
                  const FactIndex* dev_index, const TrainSignatures& signatures, const TrainConfig& config,
                  std::ostream* progress) {
  config.Validate();
  if (train.empty()) throw ArgumentError("train: no training documents");
  const bool has_dev = !dev.empty() && dev_index != nullptr;

  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].encoded.pairs.empty() && progress) {
      *progress << "skipping document '" << train[i].encoded.title << "': fewer than two entities\n";
    }
  }

  AdamW optimizer({config.learning_rate, config.weight_decay});
  TrainResult result;
  const Rng base(config.seed);
  const auto start = std::chrono::steady_clock::now();
  std::size_t step = 0;
  std::size_t stale = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = base.Fork(0, epoch + 1);
    std::shuffle(order.begin(), order.end(), shuffle.engine());

    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::span<const std::size_t> batch(order.data() + b, std::min(config.batch_size, order.size() - b));
      ZeroGrads(model.params());
      const double loss = AccumulateBatch(model, train, batch, config, epoch);
      optimizer.Step(model.params());
      ++step;
      result.log.steps.push_back({step, epoch, batch.size(), loss / static_cast<double>(batch.size())});
      result.log.step_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    if (progress) {
      *progress << "epoch " << epoch + 1 << "/" << config.epochs << " loss " << result.log.steps.back().loss << "\n";
    }

    if (has_dev && (epoch + 1) % config.eval_every == 0) {
      const PredictionSet pred = Predict(model, dev, config.min_score);
      const MetricReport report = Evaluate(pred, *dev_index, signatures, std::nullopt);
      result.log.evals.push_back(
          {step, epoch, report.threshold, report.f1.f1, report.ign_f1.f1, report.auc.auc, report.ign_auc.auc});
      const bool improved = result.log.BestEval() == result.log.evals.size() - 1;
      if (progress) *progress << "  dev f1 " << report.f1.f1 << " ign_f1 " << report.ign_f1.f1 << "\n";
      if (improved) {
        result.best_params.clear();
        for (const auto& [name, t] : model.params()) result.best_params.emplace(name, t.Clone());
        stale = 0;
      } else if (config.patience > 0 && ++stale >= config.patience) {
        if (progress) *progress << "early stop after " << stale << " evaluations without improvement\n";
        break;
      }
    }
  }

  result.best_eval = result.log.BestEval();
  if (!result.best_eval) {
    for (const auto& [name, t] : model.params()) result.best_params.emplace(name, t.Clone());
  }
  for (auto& [name, t] : result.best_params) t.ClearGrad();
  return result;
}

std::string CheckpointMetadata(const ModelConfig& model, const TrainConfig& train, const Vocab& vocab) {
  json j;
  j["model"] = json::parse(model.ToJson());
  j["train"] = json::parse(train.ToJson());
  j["vocab"] = json::parse(vocab.ToJson());
  return j.dump();
}

CheckpointInfo ParseCheckpointMetadata(const std::string& metadata) {
  json j;
  try {
    j = json::parse(metadata);
    return {ModelConfig::FromJson(j.at("model").dump()), TrainConfig::FromJson(j.at("train").dump()),
            Vocab::FromJson(j.at("vocab").dump())};
  } catch (const json::exception& e) {
    throw LoadError(std::string("checkpoint metadata: ") + e.what());
  }
}

}  // namespace gain
