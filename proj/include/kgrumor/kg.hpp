#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace kgrumor {
namespace kg {

using EntityId = std::int32_t;

// Undirected entity graph. Ids are dense 0..N-1 in order of first appearance
// in the triples file; adjacency lists are sorted ascending and deduplicated.
// Relation labels are kept per canonical (min,max) pair for reporting only;
// the first label seen for a pair wins.
class KnowledgeGraph {
 public:
  int entity_count() const { return static_cast<int>(names_.size()); }
  int edge_count() const { return edge_count_; }

  EntityId add_entity(const std::string& name);
  void add_edge(EntityId u, EntityId v, const std::string& relation);

  std::optional<EntityId> find(const std::string& name) const;
  const std::string& name(EntityId id) const { return names_.at(id); }
  const std::vector<EntityId>& neighbors(EntityId id) const;
  const std::string* relation(EntityId u, EntityId v) const;

  // Adjacency build is deferred until first use; loaders call this once.
  void finalize();

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, EntityId> ids_;
  std::vector<std::pair<EntityId, EntityId>> raw_edges_;  // canonical, with dups
  std::vector<std::vector<EntityId>> adj_;
  std::unordered_map<std::uint64_t, std::string> relations_;
  int edge_count_ = 0;
  bool finalized_ = false;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int entities, int dim) : dim_(dim), rows_(entities), has_(entities, false) {}

  int dim() const { return dim_; }
  bool has(EntityId id) const { return id >= 0 && id < static_cast<int>(has_.size()) && has_[id]; }
  const std::vector<double>& row(EntityId id) const;
  void set(EntityId id, std::vector<double> values);

 private:
  int dim_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<bool> has_;
};

struct LoadReport {
  int entities = 0;
  int edges = 0;
  std::vector<std::string> missing_embeddings;  // graph entities without a row
  int unknown_embedding_rows = 0;               // embedding names not in the graph
};

struct LoadedGraph {
  KnowledgeGraph graph;
  EmbeddingTable embeddings;
  LoadReport report;
};

// Triples: one `head<TAB>relation<TAB>tail` per line; blank lines and lines
// starting with '#' are ignored. Malformed lines throw with the line number.
KnowledgeGraph load_triples(const std::string& path);

// Embeddings: header `N d_e`, then `entity_name v1 .. v_de` per line.
// Dimension or count mismatches throw naming the offending row.
EmbeddingTable load_embeddings(const std::string& path, const KnowledgeGraph& graph,
                               LoadReport* report);

LoadedGraph load_graph(const std::string& triples_path, const std::string& embeddings_path);

// Canonical serialization; loading the result reproduces the same graph
// (ids, adjacency, retained relation labels).
void save_triples(const KnowledgeGraph& graph, const std::string& path);
void save_embeddings(const EmbeddingTable& table, const KnowledgeGraph& graph,
                     const std::string& path);

inline std::uint64_t pair_key(EntityId u, EntityId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

}  // namespace kg
}  // namespace kgrumor
