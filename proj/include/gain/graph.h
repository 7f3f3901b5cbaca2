#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gain/encoding.h"

namespace gain {

using Edge = std::pair<std::size_t, std::size_t>;

// Heterogeneous mention-level graph. Node ids: mentions in canonical order,
// then the document node (if present). Edge lists are undirected, stored as
// (u, v) with u < v, sorted and free of duplicates.
struct MentionGraph {
  std::vector<MentionSpan> mentions;
  std::size_t num_entities = 0;
  bool has_document_node = true;
  std::vector<Edge> intra_entity;
  std::vector<Edge> inter_entity;
  std::vector<Edge> document;

  std::size_t num_nodes() const { return mentions.size() + (has_document_node ? 1 : 0); }
  std::size_t document_node() const { return mentions.size(); }
};

// Undirected entity adjacency; (i, j) with i < j, sorted.
struct EntityGraph {
  std::size_t num_entities = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> adjacency;

  bool Adjacent(std::size_t i, std::size_t j) const { return adjacency[i][j]; }
};

// Two-hop intermediates for every ordered pair, ascending by entity id.
struct PathSet {
  std::size_t num_entities = 0;
  std::vector<std::vector<std::size_t>> via;

  const std::vector<std::size_t>& Paths(std::size_t head, std::size_t tail) const {
    return via.at(head * num_entities + tail);
  }
  bool Contains(std::size_t head, std::size_t tail, std::size_t middle) const;
};

MentionGraph BuildMentionGraph(const EncodedDoc& doc, bool ablate_document_node = false);
EntityGraph BuildEntityGraph(const MentionGraph& graph);
// Only two-hop paths are supported; other values throw UnsupportedError.
PathSet EnumeratePaths(const EntityGraph& graph, std::size_t max_hops = 2);

// Node table, typed edge lists, entity adjacency and path lists as text.
std::string DumpGraphs(const std::string& title, const MentionGraph& hmg, const EntityGraph& eg, const PathSet& paths);

}  // namespace gain
