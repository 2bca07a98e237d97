#include "doctest.h"
#include "kgrumor/bsc.hpp"
#include "testutil.hpp"

using namespace kgrumor;
using nn::Tensor;

TEST_CASE("alignment against a single shared atom reproduces the atom") {
  auto layer = nn::TransformerLayer::identity(4, 2);
  auto atoms = Tensor::from_rows({{1.0, 2.0, 3.0, 4.0}});
  auto features = Tensor::from_rows({{0.0, 0.0, 0.0, 0.0}, {5.0, -5.0, 5.0, -5.0}});
  auto aligned = bsc::align(features, atoms, layer);
  REQUIRE(aligned.rows() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) CHECK(aligned.at(i, j) == doctest::Approx(atoms.at(0, j)));
}

TEST_CASE("alignment validates inputs") {
  auto layer = nn::TransformerLayer::identity(4, 2);
  CHECK_THROWS(bsc::align(Tensor::zeros(2, 4), Tensor::zeros(0, 4), layer));
  CHECK_THROWS(bsc::align(Tensor::zeros(2, 6), Tensor::zeros(3, 4), layer));
}

TEST_CASE("aggregation is the affine map of the sequence mean") {
  auto seq = Tensor::from_rows({{2.0, 0.0}, {4.0, 6.0}});
  auto identity = Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  auto zero_bias = Tensor::zeros(1, 2);
  auto agg = bsc::aggregate(seq, identity, zero_bias);
  CHECK(agg.rows() == 1);
  CHECK(agg.at(0, 0) == doctest::Approx(3.0));
  CHECK(agg.at(0, 1) == doctest::Approx(3.0));

  auto bias = Tensor::from_rows({{1.0, -1.0}});
  auto shifted = bsc::aggregate(seq, identity, bias);
  CHECK(shifted.at(0, 0) == doctest::Approx(4.0));
  CHECK(shifted.at(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("fusion layout on a hand example") {
  // d = 2; residuals are r_t = (1,0), r_v = (0,1)
  auto f_t = Tensor::from_rows({{1.0, 0.0}});
  auto f_v = Tensor::from_rows({{0.0, 1.0}});
  auto zero = Tensor::zeros(1, 2);
  auto fused = bsc::fuse(f_t, zero, f_v, zero);

  REQUIRE(fused.inconsistency.cols() == 6);
  const double expected_inc[6] = {1.0, 0.0, 1.0, -1.0, 0.0, 1.0};
  for (int j = 0; j < 6; ++j) CHECK(fused.inconsistency.at(0, j) == doctest::Approx(expected_inc[j]));

  REQUIRE(fused.consistency.cols() == 6);
  for (int j = 0; j < 6; ++j) CHECK(fused.consistency.at(0, j) == 0.0);
}

TEST_CASE("fusion consistency carries aligned vectors and their product") {
  auto f_t = Tensor::from_rows({{5.0, 5.0}});
  auto f_v = Tensor::from_rows({{5.0, 5.0}});
  auto a_t = Tensor::from_rows({{2.0, 3.0}});
  auto a_v = Tensor::from_rows({{4.0, -1.0}});
  auto fused = bsc::fuse(f_t, a_t, f_v, a_v);
  const double expected_con[6] = {2.0, 3.0, 8.0, -3.0, 4.0, -1.0};
  for (int j = 0; j < 6; ++j) CHECK(fused.consistency.at(0, j) == doctest::Approx(expected_con[j]));
}

TEST_CASE("branch forward produces the documented shapes") {
  std::mt19937_64 rng(5);
  const int d = 8;
  auto layer = nn::TransformerLayer::create(d, 2, rng);
  auto atoms = nn::glorot(3, d, rng);
  auto w_a = nn::glorot(d, d, rng);
  auto b_a = Tensor::zeros(1, d, true);
  auto text = Tensor::full(4, d, 0.25);
  auto visual = Tensor::full(6, d, -0.5);

  auto out = bsc::forward(text, visual, atoms, layer, w_a, b_a);
  CHECK(out.inconsistency.cols() == 3 * d);
  CHECK(out.consistency.cols() == 3 * d);
  CHECK(out.aligned_text_agg.cols() == d);
  CHECK(out.aligned_visual_agg.cols() == d);
}

TEST_CASE("alignment bypass feeds the raw sequences through") {
  std::mt19937_64 rng(5);
  const int d = 4;
  auto layer = nn::TransformerLayer::create(d, 2, rng);
  auto atoms = nn::glorot(3, d, rng);
  auto identity = Tensor::from_rows(
      {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
  auto zero_bias = Tensor::zeros(1, d);
  auto text = Tensor::from_rows({{1.0, 2.0, 3.0, 4.0}});
  auto visual = Tensor::from_rows({{4.0, 3.0, 2.0, 1.0}});

  auto out = bsc::forward(text, visual, atoms, layer, identity, zero_bias, true);
  // aligned == input, so the residual half of the inconsistency vector is zero
  for (int j = 0; j < 3 * d; ++j) CHECK(out.inconsistency.at(0, j) == doctest::Approx(0.0));
  for (int j = 0; j < d; ++j) CHECK(out.aligned_text_agg.at(0, j) == doctest::Approx(text.at(0, j)));
}

TEST_CASE("branch gradients match finite differences") {
  std::mt19937_64 rng(13);
  const int d = 4;
  auto layer = nn::TransformerLayer::create(d, 2, rng);
  auto atoms = nn::glorot(2, d, rng);
  auto w_a = nn::glorot(d, d, rng);
  auto b_a = Tensor::zeros(1, d, true);
  auto text = nn::glorot(3, d, rng);
  auto visual = nn::glorot(2, d, rng);

  std::vector<Tensor*> params = layer.parameters();
  params.insert(params.end(), {&atoms, &w_a, &b_a, &text, &visual});
  auto loss = [&] {
    auto out = bsc::forward(text, visual, atoms, layer, w_a, b_a);
    return nn::sum_all(nn::add(nn::mul(out.inconsistency, out.consistency),
                               nn::hcat({out.aligned_text_agg, out.aligned_text_agg,
                                         out.aligned_visual_agg})));
  };
  CHECK(testutil::max_fd_rel_error(loss, params) < 1e-5);
}
