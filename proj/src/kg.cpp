#include "kgrumor/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgrumor {
namespace kg {

EntityId KnowledgeGraph::add_entity(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  const EntityId id = static_cast<EntityId>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  finalized_ = false;
  return id;
}

void KnowledgeGraph::add_edge(EntityId u, EntityId v, const std::string& relation) {
  if (u < 0 || v < 0 || u >= entity_count() || v >= entity_count())
    throw std::runtime_error("kg: edge references unknown entity id");
  if (u > v) std::swap(u, v);
  raw_edges_.emplace_back(u, v);
  relations_.emplace(pair_key(u, v), relation);  // first label wins
  finalized_ = false;
}

std::optional<EntityId> KnowledgeGraph::find(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::vector<EntityId>& KnowledgeGraph::neighbors(EntityId id) const {
  if (!finalized_) throw std::runtime_error("kg: neighbors() before finalize()");
  if (id < 0 || id >= entity_count()) throw std::runtime_error("kg: entity id out of range");
  return adj_[id];
}

const std::string* KnowledgeGraph::relation(EntityId u, EntityId v) const {
  auto it = relations_.find(pair_key(u, v));
  return it == relations_.end() ? nullptr : &it->second;
}

void KnowledgeGraph::finalize() {
  adj_.assign(names_.size(), {});
  // Self-loops register the entity but contribute no adjacency.
  std::vector<std::pair<EntityId, EntityId>> edges;
  edges.reserve(raw_edges_.size());
  for (auto [u, v] : raw_edges_)
    if (u != v) edges.emplace_back(u, v);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edge_count_ = static_cast<int>(edges.size());
  for (auto [u, v] : edges) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
  finalized_ = true;
}

const std::vector<double>& EmbeddingTable::row(EntityId id) const {
  if (!has(id)) throw std::runtime_error("embeddings: no row for entity id");
  return rows_[id];
}

void EmbeddingTable::set(EntityId id, std::vector<double> values) {
  if (id < 0 || id >= static_cast<int>(rows_.size()))
    throw std::runtime_error("embeddings: entity id out of range");
  if (static_cast<int>(values.size()) != dim_)
    throw std::runtime_error("embeddings: dimension mismatch");
  rows_[id] = std::move(values);
  has_[id] = true;
}

KnowledgeGraph load_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kg: cannot open triples file " + path);
  KnowledgeGraph g;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      throw std::runtime_error("kg: malformed triple at line " + std::to_string(line_no));
    const std::string head = line.substr(0, t1);
    const std::string rel = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string tail = line.substr(t2 + 1);
    if (head.empty() || rel.empty() || tail.empty())
      throw std::runtime_error("kg: empty field in triple at line " + std::to_string(line_no));
    const EntityId hu = g.add_entity(head);
    const EntityId tv = g.add_entity(tail);
    g.add_edge(hu, tv, rel);
  }
  g.finalize();
  return g;
}

EmbeddingTable load_embeddings(const std::string& path, const KnowledgeGraph& graph,
                               LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kg: cannot open embeddings file " + path);
  int count = 0, dim = 0;
  if (!(in >> count >> dim) || count < 0 || dim <= 0)
    throw std::runtime_error("kg: bad embeddings header");
  EmbeddingTable table(graph.entity_count(), dim);
  int unknown = 0;
  for (int r = 0; r < count; ++r) {
    std::string name;
    if (!(in >> name)) throw std::runtime_error("kg: embeddings truncated before row " + std::to_string(r + 1));
    std::vector<double> vec(dim);
    for (int j = 0; j < dim; ++j) {
      if (!(in >> vec[j]))
        throw std::runtime_error("kg: bad embedding value for entity " + name);
      if (!std::isfinite(vec[j]))
        throw std::runtime_error("kg: non-finite embedding value for entity " + name);
    }
    const auto id = graph.find(name);
    if (!id) {
      ++unknown;
      continue;
    }
    table.set(*id, std::move(vec));
  }
  if (report) {
    report->unknown_embedding_rows = unknown;
    for (EntityId id = 0; id < graph.entity_count(); ++id)
      if (!table.has(id)) report->missing_embeddings.push_back(graph.name(id));
  }
  return table;
}

LoadedGraph load_graph(const std::string& triples_path, const std::string& embeddings_path) {
  LoadedGraph out;
  out.graph = load_triples(triples_path);
  out.embeddings = load_embeddings(embeddings_path, out.graph, &out.report);
  out.report.entities = out.graph.entity_count();
  out.report.edges = out.graph.edge_count();
  return out;
}

void save_triples(const KnowledgeGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("kg: cannot write triples file " + path);
  // Each canonical edge once, ascending; isolated entities persist as
  // self-loops so they survive a round trip.
  for (EntityId u = 0; u < graph.entity_count(); ++u) {
    for (EntityId v : graph.neighbors(u)) {
      if (u >= v) continue;
      const std::string* rel = graph.relation(u, v);
      out << graph.name(u) << '\t' << (rel ? *rel : "related_to") << '\t' << graph.name(v) << '\n';
    }
  }
  for (EntityId u = 0; u < graph.entity_count(); ++u) {
    if (!graph.neighbors(u).empty()) continue;
    const std::string* rel = graph.relation(u, u);
    out << graph.name(u) << '\t' << (rel ? *rel : "self") << '\t' << graph.name(u) << '\n';
  }
}

void save_embeddings(const EmbeddingTable& table, const KnowledgeGraph& graph,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("kg: cannot write embeddings file " + path);
  int count = 0;
  for (EntityId id = 0; id < graph.entity_count(); ++id)
    if (table.has(id)) ++count;
  out << count << ' ' << table.dim() << '\n';
  out.precision(17);
  for (EntityId id = 0; id < graph.entity_count(); ++id) {
    if (!table.has(id)) continue;
    out << graph.name(id);
    for (double v : table.row(id)) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace kg
}  // namespace kgrumor
