#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gain/docred.h"
#include "gain/rng.h"
#include "gain/tape.h"

namespace gain::testing {

// Document from whitespace-separated sentences. Mentions are given as
// {entity, sentence, start, end}; entity types cycle through PER/ORG/LOC.
struct MentionSpec {
  std::size_t entity, sent, start, end;
};

inline Document MakeDoc(const std::vector<std::string>& sentences, const std::vector<MentionSpec>& mentions,
                        std::size_t num_entities, std::vector<Fact> facts = {}) {
  static const char* kTypes[] = {"PER", "ORG", "LOC"};
  Document doc;
  doc.title = "doc";
  for (const auto& s : sentences) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < s.size()) {
      std::size_t next = s.find(' ', pos);
      if (next == std::string::npos) next = s.size();
      tokens.push_back(s.substr(pos, next - pos));
      pos = next + 1;
    }
    doc.sentences.push_back(tokens);
  }
  doc.entities.resize(num_entities);
  for (const auto& m : mentions) {
    std::string surface;
    for (std::size_t i = m.start; i < m.end; ++i) surface += (i > m.start ? " " : "") + doc.sentences[m.sent][i];
    doc.entities[m.entity].mentions.push_back({m.sent, m.start, m.end, surface, kTypes[m.entity % 3]});
  }
  doc.gold_facts = std::move(facts);
  return doc;
}

inline Tensor RandomTensor(Shape shape, Rng& rng, bool requires_grad = true, double lo = -2.0, double hi = 2.0) {
  std::vector<double> data(NumElements(shape));
  for (double& v : data) v = rng.Uniform(lo, hi);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

// Largest relative error between tape gradients of `f` and central
// differences, over every element of every input.
inline double MaxGradError(const std::function<Tensor(Tape&, std::vector<Tensor>&)>& f, std::vector<Tensor> inputs,
                           double h = 1e-5) {
  for (auto& t : inputs) t.ClearGrad();
  {
    Tape tape;
    tape.Backward(f(tape, inputs));
  }
  double worst = 0.0;
  for (auto& t : inputs) {
    if (!t.requires_grad()) continue;
    const std::vector<double> analytic(t.mutable_grad().begin(), t.mutable_grad().end());
    auto data = t.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      Tape tp;
      const double plus = f(tp, inputs).item();
      data[i] = saved - h;
      Tape tm;
      const double minus = f(tm, inputs).item();
      data[i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace gain::testing
