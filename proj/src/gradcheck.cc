#include "gain/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gain/errors.h"

namespace gain {

namespace {

std::vector<std::size_t> AllPairs(const EncodedDoc& doc) {
  std::vector<std::size_t> idx(doc.pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

ModelConfig ToyConfig(std::size_t vocab_size, std::size_t num_types, std::size_t num_relations) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.num_entity_types = num_types;
  c.num_relations = num_relations;
  c.max_entities = 8;
  c.word_dim = 5;
  c.type_dim = 3;
  c.coref_dim = 3;
  c.encoder_hidden = 4;
  c.gcn_hidden = 6;
  c.edge_dim = 5;
  c.classifier_hidden = 7;
  c.dropout = 0.0;
  // Smooth, so no ReLU kink can fall inside the difference stencil.
  c.activation = Activation::kTanh;
  return c;
}

double RelativeError(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double EvalLoss(const GainModel& model, std::span<const EncodedDoc> docs) {
  Rng unused(0);
  double total = 0.0;
  for (const EncodedDoc& doc : docs) {
    Tape tape;
    const DocGraphs graphs = BuildDocGraphs(doc, model.config());
    const auto pairs = AllPairs(doc);
    total += model.Forward(tape, doc, graphs, pairs, false, unused).loss.item();
  }
  return total;
}

GradcheckReport GradCheck(GainModel& model, std::span<const EncodedDoc> docs, const GradcheckOptions& options) {
  if (docs.empty()) throw ArgumentError("gradcheck: no documents");
  GradcheckReport report;
  Rng unused(0);
  // One document at a time keeps the loss near 1, so rounding noise in the
  // differences stays well below the comparison floor.
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::span<const EncodedDoc> one = docs.subspan(d, 1);
    ZeroGrads(model.params());
    {
      Tape tape;
      const DocGraphs graphs = BuildDocGraphs(docs[d], model.config());
      const auto pairs = AllPairs(docs[d]);
      tape.Backward(model.Forward(tape, docs[d], graphs, pairs, false, unused).loss);
    }
    std::size_t checked = 0;
    for (auto& [name, tensor] : model.params()) {
      const auto grad = tensor.mutable_grad();
      const std::vector<double> analytic(grad.begin(), grad.end());
      auto data = tensor.mutable_data();
      std::size_t limit = data.size();
      if (options.max_elements_per_param > 0) limit = std::min(limit, options.max_elements_per_param);
      for (std::size_t i = 0; i < limit; ++i) {
        const double saved = data[i];
        data[i] = saved + options.step;
        const double plus = EvalLoss(model, one);
        data[i] = saved - options.step;
        const double minus = EvalLoss(model, one);
        data[i] = saved;
        const double numeric = (plus - minus) / (2.0 * options.step);
        const double err = RelativeError(analytic[i], numeric, options.floor);
        ++checked;
        if (!(err <= report.max_rel_error)) {
          report.max_rel_error = err;
          report.worst_param = name;
          report.worst_index = i;
          report.worst_doc = d;
          report.worst_analytic = analytic[i];
          report.worst_numeric = numeric;
        }
      }
    }
    report.checked = checked;
  }
  ZeroGrads(model.params());
  return report;
}

}  // namespace gain
