#include "kgrumor/paths.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace kgrumor {
namespace paths {

namespace {

constexpr int kUnseen = -1;

// Expands one BFS level in ascending id order; returns the sorted next
// frontier. First predecessor wins: a node discovered twice in the same
// level keeps the assignment from the smaller parent.
std::vector<EntityId> expand_level(const KnowledgeGraph& g, const std::vector<EntityId>& frontier,
                                   std::vector<int>& dist, std::vector<EntityId>& pred,
                                   int next_depth) {
  std::vector<EntityId> next;
  for (EntityId p : frontier) {
    for (EntityId n : g.neighbors(p)) {
      if (dist[n] != kUnseen) continue;
      dist[n] = next_depth;
      pred[n] = p;
      next.push_back(n);
    }
  }
  std::sort(next.begin(), next.end());
  return next;
}

}  // namespace

PathResult shortest_path(const KnowledgeGraph& g, EntityId u, EntityId v, int hop_cap) {
  const int n = g.entity_count();
  if (u < 0 || u >= n || v < 0 || v >= n)
    throw std::runtime_error("paths: entity id out of range");
  if (hop_cap < 0) throw std::runtime_error("paths: negative hop cap");

  PathResult res;
  if (u == v) {
    res.connected = true;
    res.nodes = {u};
    return res;
  }

  const EntityId a = std::min(u, v);
  const EntityId b = std::max(u, v);

  std::vector<int> ds(n, kUnseen), dt(n, kUnseen);
  std::vector<EntityId> ps(n, -1), pt(n, -1);
  ds[a] = 0;
  dt[b] = 0;
  std::vector<EntityId> fs = {a}, ft = {b};
  int depth_s = 0, depth_t = 0;

  const int inf = hop_cap + 1;
  int best_total = inf;
  EntityId best_meet = -1;
  auto scan_meets = [&](const std::vector<EntityId>& fresh) {
    for (EntityId x : fresh) {
      if (ds[x] == kUnseen || dt[x] == kUnseen) continue;
      const int total = ds[x] + dt[x];
      if (total < best_total || (total == best_total && x < best_meet)) {
        best_total = total;
        best_meet = x;
      }
    }
  };

  // A completed side covers all nodes within its depth exactly, so once
  // depth_s + depth_t >= true distance some shortest-path node is labeled by
  // both sides and best_total is exact.
  while (!fs.empty() && !ft.empty() && depth_s + depth_t < hop_cap &&
         depth_s + depth_t + 1 < best_total) {
    if (fs.size() <= ft.size()) {
      fs = expand_level(g, fs, ds, ps, ++depth_s);
      scan_meets(fs);
    } else {
      ft = expand_level(g, ft, dt, pt, ++depth_t);
      scan_meets(ft);
    }
  }

  if (best_total > hop_cap) return res;  // not connected within the cap

  std::vector<EntityId> left;  // a .. meet
  for (EntityId x = best_meet; x != -1; x = ps[x]) left.push_back(x);
  std::reverse(left.begin(), left.end());
  for (EntityId x = pt[best_meet]; x != -1; x = pt[x]) left.push_back(x);
  if (u != a) std::reverse(left.begin(), left.end());
  res.connected = true;
  res.nodes = std::move(left);
  return res;
}

std::vector<std::vector<int>> all_pairs_hop_matrix(const KnowledgeGraph& g) {
  const int n = g.entity_count();
  if (n > 500) throw std::runtime_error("paths: hop matrix limited to 500 nodes");
  constexpr int kInf = 1 << 28;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (EntityId j : g.neighbors(i)) d[i][j] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      const int dik = d[i][k];
      for (int j = 0; j < n; ++j)
        if (dik + d[k][j] < d[i][j]) d[i][j] = dik + d[k][j];
    }
  for (auto& row : d)
    for (int& x : row)
      if (x >= kInf) x = -1;
  return d;
}

std::vector<double> path_weights(int m, double alpha, bool from_tail) {
  if (m < 0) throw std::runtime_error("paths: negative path length");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::runtime_error("paths: alpha must be in (0,1)");
  const double norm = (1.0 - alpha) / (1.0 - std::pow(alpha, m + 1));
  std::vector<double> w(m + 1);
  for (int i = 0; i <= m; ++i) w[i] = norm * std::pow(alpha, from_tail ? m - i : i);
  return w;
}

std::vector<double> path_representation(const std::vector<EntityId>& path,
                                        const EmbeddingTable& emb, double alpha, bool from_tail) {
  if (path.empty()) throw std::runtime_error("paths: empty path");
  const std::vector<double> w = path_weights(static_cast<int>(path.size()) - 1, alpha, from_tail);
  std::vector<double> out(emb.dim(), 0.0);
  for (size_t i = 0; i < path.size(); ++i) {
    const auto& g = emb.row(path[i]);
    for (int j = 0; j < emb.dim(); ++j) out[j] += w[i] * g[j];
  }
  return out;
}

namespace {

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

PairCorrelation semantic_distance(const KnowledgeGraph& g, const EmbeddingTable& emb, EntityId u,
                                  EntityId v, double alpha, int hop_cap, double d_max,
                                  bool direct_distance) {
  PairCorrelation c;
  c.u = std::min(u, v);
  c.v = std::max(u, v);

  if (direct_distance) {
    c.connected = true;
    c.hops = c.u == c.v ? 0 : 1;
    c.h_u = emb.row(c.u);
    c.h_v = emb.row(c.v);
    c.d_s = l2_distance(c.h_u, c.h_v);
    return c;
  }

  const PathResult path = shortest_path(g, c.u, c.v, hop_cap);
  if (!path.connected) {
    c.connected = false;
    c.hops = -1;
    c.h_u = emb.row(c.u);
    c.h_v = emb.row(c.v);
    c.d_s = d_max;
    return c;
  }
  c.connected = true;
  c.hops = path.hops();
  c.h_u = path_representation(path.nodes, emb, alpha, /*from_tail=*/false);
  c.h_v = path_representation(path.nodes, emb, alpha, /*from_tail=*/true);
  c.d_s = l2_distance(c.h_u, c.h_v);
  return c;
}

double estimate_d_max(const KnowledgeGraph& g, const EmbeddingTable& emb, double alpha,
                      int hop_cap, int samples) {
  const int n = g.entity_count();
  if (n < 2) return 1.0;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);  // dataset property, not run property
  std::uniform_int_distribution<int> pick(0, n - 1);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    EntityId u = pick(rng), v = pick(rng);
    if (u == v || !emb.has(u) || !emb.has(v)) continue;
    const PathResult p = shortest_path(g, u, v, hop_cap);
    if (!p.connected) continue;
    const auto hu = path_representation(p.nodes, emb, alpha, false);
    const auto hv = path_representation(p.nodes, emb, alpha, true);
    best = std::max(best, l2_distance(hu, hv));
  }
  return best > 0.0 ? 10.0 * best : 1.0;
}

const PairCorrelation* PairCache::find(EntityId u, EntityId v) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(kg::pair_key(u, v));
  return it == map_.end() ? nullptr : &it->second;
}

const PairCorrelation& PairCache::put(PairCorrelation c) {
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = map_.emplace(kg::pair_key(c.u, c.v), std::move(c));
  return it->second;
}

}  // namespace paths
}  // namespace kgrumor
