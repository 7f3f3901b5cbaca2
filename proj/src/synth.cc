#include "gain/synth.h"

#include <algorithm>
#include <array>
#include <set>
#include <string>

#include "gain/errors.h"

namespace gain {

namespace {

constexpr std::array<const char*, 12> kSyllables = {"ka", "ro", "vel", "min", "dor", "sa",
                                                    "tu", "lin", "bra", "zek", "ol", "fen"};
constexpr std::array<const char*, 12> kFiller = {"the", "a", "report", "said", "that", "in",
                                                 "year", "often", "also", "later", "some", "news"};
// Two-syllable names give a pool of 144, so test names recur in training.
constexpr std::size_t kTwoHopSyllables = 2;
constexpr std::array<const char*, 4> kTypes = {"PER", "ORG", "LOC", "MISC"};

// Cue phrases per relation; r3 never appears in text.
const std::vector<std::vector<std::string>>& Cues() {
  static const std::vector<std::vector<std::string>> cues = {
      {"works for", "is employed by", "joined"},
      {"is based in", "is located in", "sits in"},
      {},
      {"competes with", "is a rival of", "disputes"},
  };
  return cues;
}

template <typename C>
const auto& Pick(const C& c, Rng& rng) {
  return c[rng.Index(c.size())];
}

std::string RandomName(std::size_t max_syllables, Rng& rng) {
  std::string name;
  const std::size_t n = 2 + rng.Index(max_syllables - 1);
  for (std::size_t i = 0; i < n; ++i) name += Pick(kSyllables, rng);
  return name;
}

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(' ', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

void AddFiller(std::vector<std::string>& tokens, std::size_t max_words, Rng& rng) {
  const std::size_t n = rng.Index(max_words + 1);
  for (std::size_t i = 0; i < n; ++i) tokens.push_back(Pick(kFiller, rng));
}

struct Stated {
  std::size_t head, tail, relation;
};

// Distinct names and types for `n` entities.
void MakeEntities(std::size_t n, std::size_t max_syllables, Rng& rng, std::vector<std::string>& names,
                  std::vector<std::string>& types) {
  std::set<std::string> used;
  while (names.size() < n) {
    std::string name = RandomName(max_syllables, rng);
    if (used.insert(name).second) names.push_back(name);
  }
  for (std::size_t i = 0; i < n; ++i) types.push_back(Pick(kTypes, rng));
}

// One sentence per stated fact, in the given order.
Document Render(const std::string& title, const std::vector<Stated>& stated, const std::vector<std::string>& names,
                const std::vector<std::string>& types, Rng& rng) {
  Document doc;
  doc.title = title;
  doc.entities.resize(names.size());
  auto mention = [&](std::vector<std::string>& tokens, std::size_t entity, std::size_t sent) {
    doc.entities[entity].mentions.push_back({sent, tokens.size(), tokens.size() + 1, names[entity], types[entity]});
    tokens.push_back(names[entity]);
  };
  for (const Stated& s : stated) {
    const std::size_t sent = doc.sentences.size();
    std::vector<std::string> tokens;
    AddFiller(tokens, 2, rng);
    mention(tokens, s.head, sent);
    for (auto& w : Split(Pick(Cues()[s.relation], rng))) tokens.push_back(w);
    mention(tokens, s.tail, sent);
    AddFiller(tokens, 2, rng);
    tokens.push_back(".");
    doc.sentences.push_back(std::move(tokens));
  }
  return doc;
}

}  // namespace

RelationMap TwoHopRelations() { return RelationMap::FromNames({"r1", "r2", "r3", "r4"}); }

std::vector<Document> GenerateTwoHop(const TwoHopOptions& options, Rng& rng) {
  if (options.num_entities < 3) throw ArgumentError("synth: two-hop documents need at least 3 entities");
  std::vector<Document> docs;
  while (docs.size() < options.num_docs) {
    const std::size_t n = options.num_entities;
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng.engine());
    const std::size_t h = ids[0], o = ids[1], t = ids[2];

    std::vector<Stated> stated;
    std::size_t placed = 3;
    if (rng.Bernoulli(options.positive_rate)) {
      stated = {{h, o, kR1}, {o, t, kR2}};
    } else {
      switch (rng.Index(n >= 4 ? 5 : 4)) {
        case 0: stated = {{h, o, kR1}, {o, t, kR4}}; break;
        case 1: stated = {{h, o, kR4}, {o, t, kR2}}; break;
        case 2: stated = {{h, o, kR1}, {t, o, kR2}}; break;
        case 3: stated = {{h, o, kR2}, {o, t, kR1}}; break;
        default:
          // Both links present but through different middles.
          stated = {{h, o, kR1}, {ids[3], t, kR2}};
          placed = 4;
          break;
      }
    }
    for (std::size_t i = placed; i < n; ++i) {
      const std::size_t other = ids[rng.Index(i)];
      const std::size_t rel = std::array<std::size_t, 3>{kR1, kR2, kR4}[rng.Index(3)];
      if (rng.Bernoulli(0.5)) stated.push_back({ids[i], other, rel});
      else stated.push_back({other, ids[i], rel});
    }
    std::shuffle(stated.begin(), stated.end(), rng.engine());

    // Closure of r1 then r2, and the sentence-sharing check.
    std::set<std::pair<std::size_t, std::size_t>> together;
    for (const Stated& s : stated) together.insert({std::min(s.head, s.tail), std::max(s.head, s.tail)});
    std::set<std::pair<std::size_t, std::size_t>> closure;
    for (const Stated& a : stated)
      for (const Stated& b : stated)
        if (a.relation == kR1 && b.relation == kR2 && a.tail == b.head && a.head != b.tail)
          closure.insert({a.head, b.tail});
    bool clash = false;
    for (const auto& [x, y] : closure) clash |= together.contains({std::min(x, y), std::max(x, y)});
    if (clash) continue;

    std::vector<std::string> names, types;
    MakeEntities(n, kTwoHopSyllables, rng, names, types);
    Document doc = Render("twohop-" + std::to_string(docs.size()), stated, names, types, rng);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> facts;
    for (const Stated& s : stated) facts.insert({s.head, s.tail, s.relation});
    for (const auto& [x, y] : closure) facts.insert({x, y, kR3});
    for (const auto& [x, y, r] : facts) doc.gold_facts.push_back({x, y, r, {}});
    docs.push_back(std::move(doc));
  }
  return docs;
}

Document RandomDocument(const RandomDocOptions& options, Rng& rng) {
  auto between = [&](std::size_t lo, std::size_t hi) { return lo + rng.Index(hi - lo + 1); };
  const std::size_t n_sent = between(options.min_sentences, options.max_sentences);
  const std::size_t n_ent = between(options.min_entities, options.max_entities);

  std::vector<std::string> names, types;
  MakeEntities(n_ent, 3, rng, names, types);

  // Mention slots per sentence; every entity appears at least once.
  std::vector<std::vector<std::size_t>> slots(n_sent);
  for (std::size_t e = 0; e < n_ent; ++e) {
    const std::size_t k = between(1, options.max_mentions);
    for (std::size_t m = 0; m < k; ++m) slots[rng.Index(n_sent)].push_back(e);
  }

  Document doc;
  doc.title = "random-" + std::to_string(rng.Index(1000000));
  doc.entities.resize(n_ent);
  for (std::size_t s = 0; s < n_sent; ++s) {
    std::shuffle(slots[s].begin(), slots[s].end(), rng.engine());
    std::vector<std::string> tokens;
    for (std::size_t e : slots[s]) {
      AddFiller(tokens, 2, rng);
      const std::size_t len = between(1, 2);
      Mention m{s, tokens.size(), tokens.size() + len, len == 1 ? names[e] : names[e] + " jr", types[e]};
      for (std::size_t i = 0; i < len; ++i) tokens.push_back(i == 0 ? names[e] : "jr");
      doc.entities[e].mentions.push_back(m);
    }
    AddFiller(tokens, 2, rng);
    tokens.push_back(".");
    doc.sentences.push_back(std::move(tokens));
  }

  if (n_ent >= 2 && options.num_relations > 0) {
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> facts;
    const std::size_t k = rng.Index(options.max_facts + 1);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t h = rng.Index(n_ent);
      std::size_t t = rng.Index(n_ent - 1);
      if (t >= h) ++t;
      facts.insert({h, t, rng.Index(options.num_relations)});
    }
    for (const auto& [h, t, r] : facts) doc.gold_facts.push_back({h, t, r, {}});
  }
  return doc;
}

}  // namespace gain
