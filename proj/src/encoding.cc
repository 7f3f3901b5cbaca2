#include "gain/encoding.h"

#include <algorithm>
#include <cmath>

#include "gain/errors.h"

namespace gain {

EncodedDoc EncodeDocument(const Document& doc, const Vocab& vocab) {
  ValidateDocument(doc, vocab.relations.size());
  EncodedDoc enc;
  enc.title = doc.title;
  enc.num_entities = doc.entities.size();
  enc.num_relations = vocab.relations.size();

  for (const auto& sent : doc.sentences) {
    enc.sentence_starts.push_back(enc.word_ids.size());
    for (const auto& w : sent) enc.word_ids.push_back(vocab.WordId(w));
  }
  enc.type_ids.assign(enc.word_ids.size(), Vocab::kNoneType);
  enc.coref_ids.assign(enc.word_ids.size(), Vocab::kNoneCoref);

  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    const std::size_t entity_type = vocab.TypeId(doc.entities[e].mentions.front().type_tag);
    for (const Mention& m : doc.entities[e].mentions) {
      const std::size_t begin = enc.sentence_starts[m.sent_id] + m.start;
      const std::size_t end = enc.sentence_starts[m.sent_id] + m.end;
      for (std::size_t i = begin; i < end; ++i) {
        if (enc.coref_ids[i] != Vocab::kNoneCoref && enc.coref_ids[i] != e + 1) {
          throw ValidationError("document '" + doc.title + "': token " + std::to_string(i) +
                                " is covered by mentions of entities " + std::to_string(enc.coref_ids[i] - 1) +
                                " and " + std::to_string(e));
        }
        enc.coref_ids[i] = e + 1;
        enc.type_ids[i] = entity_type;
      }
      enc.mentions.push_back({e, m.sent_id, begin, end});
    }
  }
  std::sort(enc.mentions.begin(), enc.mentions.end());

  const std::size_t n = enc.num_entities;
  std::vector<std::vector<double>> targets(n * n, std::vector<double>(enc.num_relations, 0.0));
  for (const Fact& f : doc.gold_facts) targets[f.head * n + f.tail][f.relation] = 1.0;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t t = 0; t < n; ++t) {
      if (h == t) continue;
      CandidatePair pair{h, t, std::move(targets[h * n + t]), false};
      pair.positive = std::any_of(pair.targets.begin(), pair.targets.end(), [](double v) { return v > 0.0; });
      enc.pairs.push_back(std::move(pair));
    }
  }
  return enc;
}

std::vector<std::size_t> SamplePairs(const EncodedDoc& doc, double ratio, Rng& rng, bool training) {
  std::vector<std::size_t> all(doc.pairs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (!training) return all;
  if (!(ratio > 0.0)) throw ArgumentError("sample_pairs: ratio must be positive");

  std::vector<std::size_t> positives, negatives;
  for (std::size_t i : all) (doc.pairs[i].positive ? positives : negatives).push_back(i);
  std::size_t wanted = positives.empty()
                           ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / ratio)))
                           : static_cast<std::size_t>(std::llround(static_cast<double>(positives.size()) / ratio));
  wanted = std::min(wanted, negatives.size());

  // Partial Fisher-Yates: the first `wanted` slots become the sample.
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t j = i + rng.Index(negatives.size() - i);
    std::swap(negatives[i], negatives[j]);
  }
  std::vector<std::size_t> out = positives;
  out.insert(out.end(), negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(wanted));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gain
