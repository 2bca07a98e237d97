#include "kgrumor/kec.hpp"

#include <algorithm>
#include <cmath>

namespace kgrumor {
namespace kec {

using namespace nn;

namespace {

constexpr double kDistanceFloor = 1e-6;

std::vector<EntityPair> canonical_pairs(std::vector<EntityPair> pairs) {
  for (auto& p : pairs)
    if (p.u > p.v) std::swap(p.u, p.v);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace

PairSets build_pair_sets(const std::vector<EntityId>& text_entities,
                         const std::vector<EntityId>& visual_entities) {
  PairSets out;
  const auto within = [](const std::vector<EntityId>& es) {
    std::vector<EntityPair> ps;
    for (size_t i = 0; i < es.size(); ++i)
      for (size_t j = i + 1; j < es.size(); ++j) ps.push_back({es[i], es[j]});
    return canonical_pairs(std::move(ps));
  };
  out.tt = within(text_entities);
  out.vv = within(visual_entities);
  std::vector<EntityPair> cross;
  for (EntityId t : text_entities)
    for (EntityId v : visual_entities) cross.push_back({t, v});
  out.tv = canonical_pairs(std::move(cross));
  return out;
}

Selection select_topk(const std::vector<PairCorrelation>& pairs, int k) {
  if (k <= 0) throw std::runtime_error("kec: k must be positive");
  std::vector<int> idx(pairs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  const int take = std::min<int>(k, static_cast<int>(pairs.size()));

  Selection sel;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (pairs[a].d_s != pairs[b].d_s) return pairs[a].d_s < pairs[b].d_s;
    if (pairs[a].u != pairs[b].u) return pairs[a].u < pairs[b].u;
    return pairs[a].v < pairs[b].v;
  });
  sel.relevant.assign(idx.begin(), idx.begin() + take);

  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (pairs[a].d_s != pairs[b].d_s) return pairs[a].d_s > pairs[b].d_s;
    if (pairs[a].u != pairs[b].u) return pairs[a].u < pairs[b].u;
    return pairs[a].v < pairs[b].v;
  });
  sel.irrelevant.assign(idx.begin(), idx.begin() + take);
  return sel;
}

namespace {

// score_i = query . rep_i / sqrt(width), as a (1, k) row
Tensor attention_scores(const Tensor& query, const Tensor& reps) {
  if (!reps.defined() || reps.rows() == 0) throw std::runtime_error("kec: empty representation set");
  if (query.rows() != 1 || query.cols() != reps.cols())
    throw std::runtime_error("kec: query width mismatch");
  Tensor scores = scale(matmul_nt(query, reps), 1.0 / std::sqrt(static_cast<double>(reps.cols())));
  for (double s : scores.data())
    if (!std::isfinite(s)) throw std::runtime_error("kec: non-finite attention score");
  return scores;
}

Tensor clamped(const std::vector<double>& distances, int k) {
  if (static_cast<int>(distances.size()) != k)
    throw std::runtime_error("kec: distance count mismatch");
  Tensor d = Tensor::zeros(1, k);
  for (int i = 0; i < k; ++i) d.data()[i] = std::max(distances[i], kDistanceFloor);
  return d;
}

}  // namespace

Tensor signed_attention_positive(const Tensor& query, const Tensor& reps,
                                 const std::vector<double>& distances, Tensor* raw_lambda) {
  Tensor lambda = softmax_rows(attention_scores(query, reps));
  if (raw_lambda) *raw_lambda = lambda;
  Tensor d = clamped(distances, reps.rows());
  Tensor inv_d = Tensor::zeros(1, reps.rows());
  for (int i = 0; i < reps.rows(); ++i) inv_d.data()[i] = 1.0 / d.data()[i];
  Tensor weighted = mul(lambda, inv_d);             // lambda_i / d_i
  Tensor weights = div_scalar(weighted, sum_all(weighted));
  return matmul(weights, reps);                     // (1, w)
}

Tensor signed_attention_negative(const Tensor& query, const Tensor& reps,
                                 const std::vector<double>& distances, Tensor* raw_lambda) {
  Tensor s = softmax_rows(scale(attention_scores(query, reps), -1.0));
  if (raw_lambda) *raw_lambda = scale(s, -1.0);  // raw coefficients sum to -1
  Tensor d = clamped(distances, reps.rows());
  // (sum -s_i d_i rep_i) / (sum -s_i d_i): the signs cancel, and the
  // effective weights s_i d_i / sum(s_j d_j) still favor larger distances.
  Tensor weighted = mul(s, d);
  Tensor weights = div_scalar(weighted, sum_all(weighted));
  return matmul(weights, reps);
}

Tensor entity_correlation(const Tensor& query, const std::vector<PairCorrelation>& pairs, int k,
                          const Tensor& projection, bool zero_relevant, bool zero_irrelevant) {
  const int width = projection.cols();  // 2d
  if (pairs.empty()) return Tensor::zeros(1, 2 * width);

  const Selection sel = select_topk(pairs, k);
  auto project_subset = [&](const std::vector<int>& subset, std::vector<double>& dists) {
    std::vector<Tensor> rows;
    rows.reserve(subset.size());
    for (int i : subset) {
      const auto& p = pairs[i];
      std::vector<double> cat(p.h_u);
      cat.insert(cat.end(), p.h_v.begin(), p.h_v.end());
      const int width = static_cast<int>(cat.size());
      if (width != projection.rows())
        throw std::runtime_error("kec: pair representation width mismatch");
      rows.push_back(Tensor::from_flat(1, width, std::move(cat)));
      dists.push_back(p.d_s);
    }
    return matmul(vcat(rows), projection);  // (k', 2d), keys and values
  };

  Tensor f_re, f_ir;
  if (zero_relevant) {
    f_re = Tensor::zeros(1, width);
  } else {
    std::vector<double> d_re;
    Tensor reps = project_subset(sel.relevant, d_re);
    f_re = signed_attention_positive(query, reps, d_re);
  }
  if (zero_irrelevant) {
    f_ir = Tensor::zeros(1, width);
  } else {
    std::vector<double> d_ir;
    Tensor reps = project_subset(sel.irrelevant, d_ir);
    f_ir = signed_attention_negative(query, reps, d_ir);
  }
  return hcat({f_re, f_ir});
}

}  // namespace kec
}  // namespace kgrumor
