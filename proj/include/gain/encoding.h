#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gain/docred.h"
#include "gain/rng.h"
#include "gain/vocab.h"

namespace gain {

// Mention with document-level token offsets [begin, end).
struct MentionSpan {
  std::size_t entity = 0;
  std::size_t sent_id = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  auto operator<=>(const MentionSpan&) const = default;
};

struct CandidatePair {
  std::size_t head = 0;
  std::size_t tail = 0;
  // Multi-hot over relation ids.
  std::vector<double> targets;
  bool positive = false;
};

// Token-aligned id arrays for one document. Mentions are in canonical
// (entity, sentence, start) order; pairs hold every ordered (h, t), h != t,
// in row-major order.
struct EncodedDoc {
  std::string title;
  std::vector<std::size_t> word_ids;
  std::vector<std::size_t> type_ids;
  std::vector<std::size_t> coref_ids;
  std::vector<std::size_t> sentence_starts;
  std::vector<MentionSpan> mentions;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::vector<CandidatePair> pairs;

  std::size_t num_tokens() const { return word_ids.size(); }
};

// Throws ValidationError when mentions of different entities share a token.
EncodedDoc EncodeDocument(const Document& doc, const Vocab& vocab);

// Indices into `doc.pairs`, ascending. Evaluation keeps every pair. Training
// keeps every positive pair plus round(#pos / ratio) sampled negatives,
// capped at the number available; a document with no positives still gets
// max(1, round(1 / ratio)) negatives (capped).
std::vector<std::size_t> SamplePairs(const EncodedDoc& doc, double ratio, Rng& rng, bool training);

}  // namespace gain
