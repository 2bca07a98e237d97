#include <cmath>
#include <random>

#include "doctest.h"
#include "kgrumor/kec.hpp"
#include "testutil.hpp"

using namespace kgrumor;
using namespace kgrumor::kec;
using nn::Tensor;

namespace {

paths::PairCorrelation make_pair(kg::EntityId u, kg::EntityId v, double d_s,
                                 std::vector<double> h_u = {}, std::vector<double> h_v = {}) {
  paths::PairCorrelation p;
  p.u = u;
  p.v = v;
  p.connected = true;
  p.d_s = d_s;
  p.h_u = std::move(h_u);
  p.h_v = std::move(h_v);
  return p;
}

}  // namespace

TEST_CASE("pair sets have closed-form sizes for disjoint entities") {
  for (int nt = 0; nt <= 8; ++nt) {
    for (int nv = 0; nv <= 8; ++nv) {
      std::vector<kg::EntityId> text, visual;
      for (int i = 0; i < nt; ++i) text.push_back(i);
      for (int i = 0; i < nv; ++i) visual.push_back(100 + i);
      auto sets = build_pair_sets(text, visual);
      CHECK(static_cast<int>(sets.tt.size()) == nt * (nt - 1) / 2);
      CHECK(static_cast<int>(sets.vv.size()) == nv * (nv - 1) / 2);
      CHECK(static_cast<int>(sets.tv.size()) == nt * nv);
    }
  }
}

TEST_CASE("pair sets are canonical and deduplicated") {
  auto sets = build_pair_sets({5, 2}, {2, 7});
  REQUIRE(sets.tt.size() == 1);
  CHECK(sets.tt[0] == EntityPair{2, 5});
  // cross pairs: (5,2),(5,7),(2,2),(2,7) -> canonical sorted unique
  REQUIRE(sets.tv.size() == 4);
  CHECK(sets.tv[0] == EntityPair{2, 2});
  CHECK(sets.tv[1] == EntityPair{2, 5});
  CHECK(sets.tv[2] == EntityPair{2, 7});
  CHECK(sets.tv[3] == EntityPair{5, 7});
}

TEST_CASE("top-k selection orders by distance with pair-id ties") {
  std::vector<paths::PairCorrelation> pairs{
      make_pair(0, 1, 3.0),
      make_pair(0, 2, 1.0),
      make_pair(1, 2, 2.0),
      make_pair(0, 3, 2.0),
  };
  auto sel = select_topk(pairs, 2);
  REQUIRE(sel.relevant.size() == 2);
  CHECK(sel.relevant[0] == 1);  // d_s 1.0
  CHECK(sel.relevant[1] == 3);  // d_s 2.0, pair (0,3) before (1,2)
  REQUIRE(sel.irrelevant.size() == 2);
  CHECK(sel.irrelevant[0] == 0);  // d_s 3.0
  CHECK(sel.irrelevant[1] == 3);

  auto all = select_topk(pairs, 99);
  CHECK(all.relevant.size() == 4);
  CHECK(all.irrelevant.size() == 4);
  CHECK_THROWS(select_topk(pairs, 0));
}

TEST_CASE("positive attention divides by distance") {
  // equal scores from a zero query; distances 1 and 2 -> weights 2/3, 1/3
  auto query = Tensor::zeros(1, 2);
  auto reps = Tensor::from_rows({{3.0, 0.0}, {0.0, 3.0}});
  Tensor lambda;
  auto out = signed_attention_positive(query, reps, {1.0, 2.0}, &lambda);
  CHECK(std::abs(out.at(0, 0) - 2.0) < 1e-10);
  CHECK(std::abs(out.at(0, 1) - 1.0) < 1e-10);
  CHECK(lambda.at(0, 0) == doctest::Approx(0.5));
  CHECK(lambda.at(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("negative attention multiplies by distance") {
  // equal scores; distances 1 and 3 -> effective weights 1/4, 3/4
  auto query = Tensor::zeros(1, 2);
  auto reps = Tensor::from_rows({{4.0, 0.0}, {0.0, 4.0}});
  Tensor lambda;
  auto out = signed_attention_negative(query, reps, {1.0, 3.0}, &lambda);
  CHECK(std::abs(out.at(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(out.at(0, 1) - 3.0) < 1e-10);
  // raw coefficients are a negated softmax
  CHECK(lambda.at(0, 0) == doctest::Approx(-0.5));
  CHECK(lambda.at(0, 0) + lambda.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("single pair collapses to its representation") {
  auto query = Tensor::from_rows({{0.3, -0.7}});
  auto reps = Tensor::from_rows({{1.25, -2.5}});
  auto pos = signed_attention_positive(query, reps, {0.8});
  auto neg = signed_attention_negative(query, reps, {0.8});
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(pos.at(0, j) - reps.at(0, j)) < 1e-10);
    CHECK(std::abs(neg.at(0, j) - reps.at(0, j)) < 1e-10);
  }
}

TEST_CASE("effective weights stay on the simplex") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_real_distribution<double> dist(0.1, 5.0);
  std::uniform_int_distribution<int> karg(1, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = karg(rng);
    const int w = 4;
    auto query = Tensor::zeros(1, w);
    auto reps = Tensor::zeros(k, w);
    for (auto& x : query.data()) x = val(rng);
    for (auto& x : reps.data()) x = val(rng);
    std::vector<double> d(k);
    for (auto& x : d) x = dist(rng);

    Tensor lam_pos, lam_neg;
    auto pos = signed_attention_positive(query, reps, d, &lam_pos);
    auto neg = signed_attention_negative(query, reps, d, &lam_neg);

    double pos_sum = 0.0, pos_norm = 0.0, neg_sum = 0.0, neg_norm = 0.0;
    for (int i = 0; i < k; ++i) {
      pos_norm += lam_pos.at(0, i) / d[i];
      neg_norm += -lam_neg.at(0, i) * d[i];
    }
    std::vector<double> wp(k), wn(k);
    for (int i = 0; i < k; ++i) {
      wp[i] = (lam_pos.at(0, i) / d[i]) / pos_norm;
      wn[i] = (-lam_neg.at(0, i) * d[i]) / neg_norm;
      REQUIRE(wp[i] >= 0.0);
      REQUIRE(wn[i] >= 0.0);
      pos_sum += wp[i];
      neg_sum += wn[i];
    }
    REQUIRE(std::abs(pos_sum - 1.0) < 1e-6);
    REQUIRE(std::abs(neg_sum - 1.0) < 1e-6);

    // outputs are exactly these convex combinations of the rows
    for (int j = 0; j < w; ++j) {
      double pj = 0.0, nj = 0.0;
      for (int i = 0; i < k; ++i) {
        pj += wp[i] * reps.at(i, j);
        nj += wn[i] * reps.at(i, j);
      }
      REQUIRE(pos.at(0, j) == doctest::Approx(pj).epsilon(1e-9));
      REQUIRE(neg.at(0, j) == doctest::Approx(nj).epsilon(1e-9));
    }
  }
}

TEST_CASE("attention input validation") {
  auto query = Tensor::zeros(1, 2);
  CHECK_THROWS(signed_attention_positive(query, Tensor::zeros(0, 2), {}));
  CHECK_THROWS(signed_attention_positive(query, Tensor::zeros(2, 3), {1.0, 1.0}));
  CHECK_THROWS(signed_attention_positive(query, Tensor::zeros(2, 2), {1.0}));
  // zero distances hit the clamp floor instead of dividing by zero
  auto out = signed_attention_positive(query, Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}}),
                                       {0.0, 0.0});
  for (int j = 0; j < 2; ++j) CHECK(std::isfinite(out.at(0, j)));
}

TEST_CASE("entity correlation projects pairs and concatenates both halves") {
  // d_e = 1, projected width 2: projection doubles [h_u ; h_v]
  auto projection = Tensor::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  auto query = Tensor::zeros(1, 2);
  std::vector<paths::PairCorrelation> pairs{
      make_pair(0, 1, 1.0, {1.0}, {0.0}),
      make_pair(0, 2, 2.0, {0.0}, {1.0}),
  };

  auto out = entity_correlation(query, pairs, 2, projection);
  REQUIRE(out.cols() == 4);
  // relevant half: weights (2/3, 1/3) over rows (2,0) and (0,2)
  CHECK(out.at(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK(out.at(0, 1) == doctest::Approx(2.0 / 3.0));
  // irrelevant half: effective weights (1/3, 2/3) over the same rows
  CHECK(out.at(0, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(out.at(0, 3) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("entity correlation edge wiring") {
  auto projection = Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  auto query = Tensor::zeros(1, 2);

  SUBCASE("no pairs yields a zero vector") {
    auto out = entity_correlation(query, {}, 3, projection);
    REQUIRE(out.cols() == 4);
    for (int j = 0; j < 4; ++j) CHECK(out.at(0, j) == 0.0);
  }

  SUBCASE("halves can be blanked independently") {
    std::vector<paths::PairCorrelation> pairs{make_pair(0, 1, 1.0, {1.0}, {1.0})};
    auto no_re = entity_correlation(query, pairs, 1, projection, true, false);
    CHECK(no_re.at(0, 0) == 0.0);
    CHECK(no_re.at(0, 2) == 1.0);
    auto no_ir = entity_correlation(query, pairs, 1, projection, false, true);
    CHECK(no_ir.at(0, 0) == 1.0);
    CHECK(no_ir.at(0, 2) == 0.0);
  }

  SUBCASE("mismatched representation width throws") {
    std::vector<paths::PairCorrelation> pairs{make_pair(0, 1, 1.0, {1.0, 2.0}, {3.0, 4.0})};
    CHECK_THROWS(entity_correlation(query, pairs, 1, projection));
  }
}

TEST_CASE("projection gradients flow through signed attention") {
  std::mt19937_64 rng(31);
  auto projection = nn::glorot(2, 2, rng);
  auto query = nn::glorot(1, 2, rng);
  std::vector<paths::PairCorrelation> pairs{
      make_pair(0, 1, 0.4, {0.7}, {-0.3}),
      make_pair(0, 2, 1.7, {-0.2}, {0.9}),
      make_pair(1, 2, 0.9, {0.5}, {0.5}),
  };
  std::vector<Tensor*> params{&projection, &query};
  auto loss = [&] { return nn::sum_all(entity_correlation(query, pairs, 2, projection)); };
  CHECK(testutil::max_fd_rel_error(loss, params) < 1e-6);
}
