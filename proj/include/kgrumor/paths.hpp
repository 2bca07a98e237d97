#pragma once

#include <mutex>
#include <unordered_map>

#include "kgrumor/kg.hpp"

namespace kgrumor {
namespace paths {

using kg::EntityId;
using kg::EmbeddingTable;
using kg::KnowledgeGraph;

struct PathResult {
  bool connected = false;
  std::vector<EntityId> nodes;  // u..v inclusive when connected
  int hops() const { return static_cast<int>(nodes.size()) - 1; }
};

// Minimum-hop path within hop_cap, found by bidirectional breadth-first
// search. Deterministic: pairs are canonicalized to (min,max), frontiers are
// expanded in ascending id order, the first predecessor assigned to a node
// wins, and (u,v) returns the exact reverse of (v,u). u == v yields the
// single-node path.
PathResult shortest_path(const KnowledgeGraph& g, EntityId u, EntityId v, int hop_cap);

// Exhaustive all-pairs hop distances (Floyd-Warshall), -1 where unreachable.
// Exists as an independent check on shortest_path and refuses graphs with
// more than 500 nodes.
std::vector<std::vector<int>> all_pairs_hop_matrix(const KnowledgeGraph& g);

// Geometric weights over an (m+1)-node path for one endpoint: position i
// carries alpha^i from the head or alpha^(m-i) from the tail, normalized by
// (1-alpha)/(1-alpha^(m+1)) so they sum to one.
std::vector<double> path_weights(int m, double alpha, bool from_tail);

// Weighted sum of node embeddings along a path. Every node must have an
// embedding row.
std::vector<double> path_representation(const std::vector<EntityId>& path,
                                        const EmbeddingTable& emb, double alpha, bool from_tail);

struct PairCorrelation {
  EntityId u = 0, v = 0;       // canonical, u <= v
  bool connected = false;
  int hops = -1;
  std::vector<double> h_u, h_v;  // path-aware endpoint representations
  double d_s = 0.0;              // semantic relevant distance
};

// Path-aware endpoint representations and their L2 distance. Unconnected
// pairs (within hop_cap) get D_s = d_max and endpoint self-representations
// (their own embeddings). When direct_distance is set the path search is
// bypassed entirely: h is the raw embedding and D_s the embedding distance.
PairCorrelation semantic_distance(const KnowledgeGraph& g, const EmbeddingTable& emb, EntityId u,
                                  EntityId v, double alpha, int hop_cap, double d_max,
                                  bool direct_distance = false);

// Samples connected pairs to fix the unreachable-pair distance for one
// dataset: 10x the largest connected D_s seen. The sampling seed is a fixed
// constant so every run over the same data agrees.
double estimate_d_max(const KnowledgeGraph& g, const EmbeddingTable& emb, double alpha,
                      int hop_cap, int samples = 2000);

// Insert-or-read cache keyed by canonical pair. Safe for concurrent lookups.
class PairCache {
 public:
  const PairCorrelation* find(EntityId u, EntityId v) const;
  const PairCorrelation& put(PairCorrelation c);

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, PairCorrelation> map_;
};

}  // namespace paths
}  // namespace kgrumor
