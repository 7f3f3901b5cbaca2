#pragma once

// Brute-force references for graph construction and metrics. They work from
// the raw Document and plain loops, sharing no code with the library paths
// they check.

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "gain/docred.h"
#include "gain/metrics.h"

namespace gain::oracle {

using EdgeSet = std::set<std::pair<std::size_t, std::size_t>>;

struct Node {
  std::size_t entity, sent, start, end;
  auto operator<=>(const Node&) const = default;
};

inline std::vector<Node> Nodes(const Document& doc) {
  std::vector<Node> nodes;
  for (std::size_t e = 0; e < doc.entities.size(); ++e)
    for (const auto& m : doc.entities[e].mentions) nodes.push_back({e, m.sent_id, m.start, m.end});
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

struct Graphs {
  EdgeSet intra, inter, document;
  EdgeSet entity;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> paths;
};

inline Graphs Build(const Document& doc, bool document_node) {
  Graphs g;
  const auto nodes = Nodes(doc);
  const std::size_t n = nodes.size();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (nodes[u].entity == nodes[v].entity) g.intra.insert({u, v});
      else if (nodes[u].sent == nodes[v].sent) g.inter.insert({u, v});
    }
    if (document_node) g.document.insert({u, n});
  }
  // Entities are adjacent when any sentence holds mentions of both.
  const std::size_t k = doc.entities.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
        bool has_i = false, has_j = false;
        for (const auto& m : doc.entities[i].mentions) has_i |= m.sent_id == s;
        for (const auto& m : doc.entities[j].mentions) has_j |= m.sent_id == s;
        if (has_i && has_j) g.entity.insert({i, j});
      }
  auto adj = [&](std::size_t a, std::size_t b) { return g.entity.contains({std::min(a, b), std::max(a, b)}); };
  for (std::size_t h = 0; h < k; ++h)
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t o = 0; o < k; ++o)
        if (h != t && o != h && o != t && adj(h, o) && adj(o, t)) g.paths[{h, t}].push_back(o);
  return g;
}

// ---- metrics ----

inline Prf Score(const std::vector<FactKey>& predicted, const std::vector<FactKey>& gold) {
  if (predicted.empty() && gold.empty()) return {1, 1, 1};
  std::size_t correct = 0;
  for (const auto& p : predicted)
    for (const auto& g : gold)
      if (p == g) ++correct;
  Prf out;
  if (!predicted.empty()) out.precision = double(correct) / double(predicted.size());
  if (!gold.empty()) out.recall = double(correct) / double(gold.size());
  if (out.precision + out.recall > 0) out.f1 = 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

inline std::vector<FactKey> Above(const std::vector<ScoredFact>& pred, double threshold) {
  std::vector<FactKey> out;
  for (const auto& p : pred)
    if (p.score > threshold) out.push_back(p.key);
  return out;
}

inline std::vector<FactKey> GoldOf(const std::vector<Document>& docs) {
  std::vector<FactKey> gold;
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& f : docs[d].gold_facts) {
      FactKey k{d, f.head, f.tail, f.relation};
      if (std::find(gold.begin(), gold.end(), k) == gold.end()) gold.push_back(k);
    }
  return gold;
}

inline bool Contains(const std::vector<FactKey>& v, const FactKey& k) {
  return std::find(v.begin(), v.end(), k) != v.end();
}

// A fact is in train when some head mention name, tail mention name and the
// relation name all match a training fact's mention names and relation.
inline bool InTrain(const Document& doc, const FactKey& k, const std::vector<Document>& train,
                    const RelationMap& relations) {
  for (const auto& tdoc : train)
    for (const auto& f : tdoc.gold_facts) {
      if (relations.Name(f.relation) != relations.Name(k.relation)) continue;
      for (const auto& hm : doc.entities[k.head].mentions)
        for (const auto& tm : doc.entities[k.tail].mentions)
          for (const auto& thm : tdoc.entities[f.head].mentions)
            for (const auto& ttm : tdoc.entities[f.tail].mentions)
              if (hm.surface == thm.surface && tm.surface == ttm.surface) return true;
    }
  return false;
}

inline double Auc(const std::vector<ScoredFact>& pred, const std::vector<FactKey>& gold) {
  if (gold.empty()) return 0.0;
  std::vector<double> levels;
  for (const auto& p : pred) levels.push_back(p.score);
  std::sort(levels.rbegin(), levels.rend());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double area = 0, prev_recall = 0;
  for (double v : levels) {
    std::size_t n = 0, tp = 0;
    for (const auto& p : pred)
      if (p.score >= v) {
        ++n;
        tp += Contains(gold, p.key);
      }
    const double recall = double(tp) / double(gold.size());
    area += (recall - prev_recall) * (double(tp) / double(n));
    prev_recall = recall;
  }
  return area;
}

inline bool SharesSentence(const Document& doc, std::size_t a, std::size_t b) {
  for (const auto& x : doc.entities[a].mentions)
    for (const auto& y : doc.entities[b].mentions)
      if (x.sent_id == y.sent_id) return true;
  return false;
}

// Every gold fact appearing in some (h, r1, o), (o, r2, t), (h, r3, t)
// instance, by enumerating all entity triples and relation triples.
inline std::vector<FactKey> InferConsidered(const std::vector<FactKey>& gold, std::size_t num_docs,
                                            std::size_t max_entities, std::size_t num_relations) {
  std::vector<FactKey> out;
  auto add = [&](const FactKey& k) {
    if (!Contains(out, k)) out.push_back(k);
  };
  for (std::size_t d = 0; d < num_docs; ++d)
    for (std::size_t h = 0; h < max_entities; ++h)
      for (std::size_t o = 0; o < max_entities; ++o)
        for (std::size_t t = 0; t < max_entities; ++t) {
          if (h == o || o == t || h == t) continue;
          for (std::size_t r1 = 0; r1 < num_relations; ++r1)
            for (std::size_t r2 = 0; r2 < num_relations; ++r2)
              for (std::size_t r3 = 0; r3 < num_relations; ++r3) {
                const FactKey a{d, h, o, r1}, b{d, o, t, r2}, c{d, h, t, r3};
                if (Contains(gold, a) && Contains(gold, b) && Contains(gold, c)) {
                  add(a);
                  add(b);
                  add(c);
                }
              }
        }
  return out;
}

}  // namespace gain::oracle
