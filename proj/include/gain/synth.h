#pragma once

#include <cstddef>
#include <vector>

#include "gain/docred.h"
#include "gain/rng.h"

namespace gain {

// Relation ids of the two-hop corpus: r1 and r2 compose into r3; r4 never
// composes.
enum TwoHopRelation : std::size_t { kR1 = 0, kR2 = 1, kR3 = 2, kR4 = 3 };

RelationMap TwoHopRelations();

struct TwoHopOptions {
  std::size_t num_docs = 200;
  // At least 3. Entities beyond the first three get one distractor fact each.
  std::size_t num_entities = 3;
  double positive_rate = 0.5;
};

// Each sentence states one fact between two entities. A positive document
// holds a chain h -r1-> o -r2-> t. A negative one breaks it with a wrong
// relation, a wrong direction, swapped relations, or (with four or more
// entities) two links through different middles.
// Gold r3 is the closure of all r1/r2 chains; a document in which a closure
// pair shares a sentence is redrawn, so every r3 fact is inter-sentential.
std::vector<Document> GenerateTwoHop(const TwoHopOptions& options, Rng& rng);

struct RandomDocOptions {
  std::size_t min_sentences = 2;
  std::size_t max_sentences = 4;
  std::size_t min_entities = 3;
  std::size_t max_entities = 5;
  std::size_t max_mentions = 3;
  std::size_t num_relations = 3;
  std::size_t max_facts = 4;
};

// Unstructured random document: entities scattered over sentences with
// random facts. Used by the graph and gradient oracles.
Document RandomDocument(const RandomDocOptions& options, Rng& rng);

}  // namespace gain
