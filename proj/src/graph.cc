#include "gain/graph.h"

#include <algorithm>
#include <sstream>

#include "gain/errors.h"

namespace gain {

bool PathSet::Contains(std::size_t head, std::size_t tail, std::size_t middle) const {
  const auto& list = Paths(head, tail);
  return std::binary_search(list.begin(), list.end(), middle);
}

MentionGraph BuildMentionGraph(const EncodedDoc& doc, bool ablate_document_node) {
  MentionGraph g;
  g.mentions = doc.mentions;
  std::sort(g.mentions.begin(), g.mentions.end());
  g.num_entities = doc.num_entities;
  g.has_document_node = !ablate_document_node;

  const std::size_t n = g.mentions.size();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const MentionSpan& a = g.mentions[u];
      const MentionSpan& b = g.mentions[v];
      if (a.entity == b.entity) {
        g.intra_entity.emplace_back(u, v);
      } else if (a.sent_id == b.sent_id) {
        g.inter_entity.emplace_back(u, v);
      }
    }
    if (g.has_document_node) g.document.emplace_back(u, g.document_node());
  }
  return g;
}

EntityGraph BuildEntityGraph(const MentionGraph& graph) {
  EntityGraph eg;
  eg.num_entities = graph.num_entities;
  eg.adjacency.assign(eg.num_entities, std::vector<bool>(eg.num_entities, false));
  for (const auto& [u, v] : graph.inter_entity) {
    const std::size_t a = graph.mentions[u].entity;
    const std::size_t b = graph.mentions[v].entity;
    eg.adjacency[a][b] = eg.adjacency[b][a] = true;
  }
  for (std::size_t i = 0; i < eg.num_entities; ++i)
    for (std::size_t j = i + 1; j < eg.num_entities; ++j)
      if (eg.adjacency[i][j]) eg.edges.emplace_back(i, j);
  return eg;
}

PathSet EnumeratePaths(const EntityGraph& graph, std::size_t max_hops) {
  if (max_hops != 2) {
    throw UnsupportedError("enumerate_paths: only two-hop paths are supported (got max_hops=" +
                           std::to_string(max_hops) + ")");
  }
  PathSet paths;
  const std::size_t n = graph.num_entities;
  paths.num_entities = n;
  paths.via.assign(n * n, {});
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t t = 0; t < n; ++t) {
      if (h == t) continue;
      for (std::size_t o = 0; o < n; ++o) {
        if (o != h && o != t && graph.adjacency[h][o] && graph.adjacency[o][t]) paths.via[h * n + t].push_back(o);
      }
    }
  }
  return paths;
}

std::string DumpGraphs(const std::string& title, const MentionGraph& hmg, const EntityGraph& eg, const PathSet& paths) {
  std::ostringstream out;
  auto edges = [&](const char* name, const std::vector<Edge>& list) {
    out << name << " " << list.size() << "\n";
    for (const auto& [u, v] : list) out << "  " << u << " " << v << "\n";
  };
  out << "document " << title << "\n";
  out << "nodes " << hmg.num_nodes() << "\n";
  for (std::size_t i = 0; i < hmg.mentions.size(); ++i) {
    const MentionSpan& m = hmg.mentions[i];
    out << "  " << i << " mention entity=" << m.entity << " sent=" << m.sent_id << " span=" << m.begin << ":" << m.end
        << "\n";
  }
  if (hmg.has_document_node) out << "  " << hmg.document_node() << " document\n";
  edges("intra_entity", hmg.intra_entity);
  edges("inter_entity", hmg.inter_entity);
  edges("document", hmg.document);
  edges("entity_graph", eg.edges);
  std::size_t with_paths = 0;
  for (const auto& v : paths.via) with_paths += v.empty() ? 0 : 1;
  out << "paths " << with_paths << "\n";
  for (std::size_t h = 0; h < paths.num_entities; ++h) {
    for (std::size_t t = 0; t < paths.num_entities; ++t) {
      const auto& via = paths.Paths(h, t);
      if (via.empty()) continue;
      out << "  " << h << " " << t << " via";
      for (std::size_t o : via) out << " " << o;
      out << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

}  // namespace gain
