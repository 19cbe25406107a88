#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hmax/error.hpp"
#include "hmax/layers.hpp"
#include "hmax/learning.hpp"
#include "hmax/synthetic.hpp"
#include "oracles.hpp"

using namespace hmax;

namespace {

S1Response random_s1(int rows, int cols, Rng& rng) {
  S1Response s1;
  for (int b = 0; b < kBands; ++b)
    for (int s = 0; s < kScalesPerBand; ++s)
      for (int o = 0; o < kOrientations; ++o) s1.map(b, s, o) = oracle::random_matrix(rows, cols, rng);
  return s1;
}

C1Response random_c1(const std::vector<std::pair<int, int>>& dims, Rng& rng) {
  C1Response c1;
  for (int b = 0; b < kBands; ++b) {
    const auto [r, c] = dims[static_cast<std::size_t>(b)];
    for (int o = 0; o < kOrientations; ++o) c1.map(b, o) = oracle::random_matrix(r, c, rng);
  }
  return c1;
}

Prototype random_prototype(int n, Rng& rng) {
  Prototype p;
  p.size = n;
  p.band = 1;
  p.tensor.resize(static_cast<std::size_t>(n * n * 4));
  for (float& v : p.tensor) v = static_cast<float>(uniform_unit(rng));
  return p;
}

void expect_same(const C1Response& a, const C1Response& b) {
  for (int band = 0; band < kBands; ++band)
    for (int o = 0; o < kOrientations; ++o) ASSERT_EQ(a.map(band, o), b.map(band, o)) << "band " << band;
}

GrayImage crop(const GrayImage& img, int r0, int c0, int h, int w) {
  Matrix m(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) m(r, c) = img(r0 + r, c0 + c);
  return GrayImage(std::move(m));
}

double l2(const C2Vector& a, const C2Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(C1Geometry, GridAndStride) {
  for (int b = 1; b <= kBands; ++b) {
    EXPECT_EQ(C1Params::grid_size(b), 8 + 2 * (b - 1));
    EXPECT_EQ(C1Params{Overlap::none}.stride(b), C1Params::grid_size(b));
    EXPECT_EQ(C1Params{Overlap::half}.stride(b), 4 + (b - 1));
  }
}

TEST(C1, MatchesBruteForceWindows) {
  Rng rng(1);
  for (Overlap ov : {Overlap::none, Overlap::half}) {
    for (int trial = 0; trial < 3; ++trial) {
      const S1Response s1 = random_s1(22 + trial * 9, 25 + trial * 4, rng);
      const C1Params params{ov};
      const C1Response c1 = c1_layer(s1, params);
      expect_same(c1, oracle::brute_force_c1(s1, params));
      for (int b = 0; b < kBands; ++b) {
        const int n = C1Params::grid_size(b + 1);
        EXPECT_EQ(c1.rows(b), (s1.map(b, 0, 0).rows() - n) / params.stride(b + 1) + 1);
      }
    }
  }
}

TEST(C1, ConstantMapsStayConstant) {
  S1Response s1;
  for (auto& band : s1.bands)
    for (auto& scale : band)
      for (auto& m : scale) m = Matrix(30, 30, 0.7);
  const C1Response c1 = c1_layer(s1, {});
  for (const auto& band : c1.bands)
    for (const auto& m : band)
      for (double v : m.values()) EXPECT_EQ(v, 0.7);
}

TEST(C1, FullWindowIsGlobalMax) {
  Rng rng(2);
  const S1Response s1 = random_s1(22, 22, rng);
  const C1Response c1 = c1_layer(s1, {Overlap::none});
  for (int o = 0; o < kOrientations; ++o) {
    ASSERT_EQ(c1.rows(7), 1);
    ASSERT_EQ(c1.cols(7), 1);
    double best = 0.0;
    for (int s = 0; s < 2; ++s)
      for (double v : s1.map(7, s, o).values()) best = std::max(best, v);
    EXPECT_EQ(c1.map(7, o)(0, 0), best);
  }
}

TEST(C1, MapSmallerThanGrid) {
  Rng rng(3);
  EXPECT_THROW(c1_layer(random_s1(21, 40, rng), {}), Error);
}

TEST(Embedding, WorkedValues) {
  EXPECT_NEAR(embedded_value(0.50, 0.49, EmbedRule::opt3()), 0.745, 1e-12);
  EXPECT_NEAR(relative_gap_pct(0.50, 0.49), 2.0, 1e-9);
  EXPECT_EQ(relative_gap_pct(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(embedded_value(0.3, 0.1, EmbedRule::opt1()), 0.4);
  EXPECT_DOUBLE_EQ(embedded_value(1.0, 0.995, EmbedRule::opt2()), 1.0 + 0.5 * 0.995);
  EXPECT_DOUBLE_EQ(embedded_value(1.0, 0.9, EmbedRule::opt2()), 1.0);  // 10% gap: outside every interval
  EXPECT_DOUBLE_EQ(embedded_value(0.0, 0.0, EmbedRule::opt3()), 0.0);
}

TEST(Embedding, RuleValidation) {
  EXPECT_NO_THROW(EmbedRule::opt2().validate());
  EXPECT_THROW(EmbedRule::all(1.5).validate(), Error);
  EXPECT_THROW(EmbedRule::banded({{0.0, 3.0, 0.5}, {2.0, 5.0, 0.1}}).validate(), Error);
  EXPECT_THROW(EmbedRule::banded({{0.0, 6.0, 0.5}}).validate(), Error);
}

TEST(Embedding, ZeroWeightEqualsPlainC1) {
  Rng rng(4);
  const S1Response s1 = random_s1(30, 27, rng);
  expect_same(c1_layer_embedded(s1, {}, EmbedRule::all(0.0)), c1_layer(s1, {}));
  expect_same(c1_layer_embedded(s1, {}, EmbedRule::off()), c1_layer(s1, {}));
}

TEST(Embedding, PresetsMatchOracleAndBounds) {
  Rng rng(5);
  S1Response s1 = random_s1(26, 31, rng);
  // Pull the second scale close to the first so the banded rules engage.
  for (auto& band : s1.bands)
    for (int o = 0; o < kOrientations; ++o)
      for (std::size_t i = 0; i < band[1][static_cast<std::size_t>(o)].values().size(); ++i)
        band[1][static_cast<std::size_t>(o)].values()[i] =
            band[0][static_cast<std::size_t>(o)].values()[i] * (1.0 - 0.06 * uniform_unit(rng));
  const C1Response plain = c1_layer(s1, {});
  for (const EmbedRule& rule : {EmbedRule::opt1(), EmbedRule::opt2(), EmbedRule::opt3()}) {
    const C1Response emb = c1_layer_embedded(s1, {}, rule);
    expect_same(emb, oracle::brute_force_c1(s1, {}, rule));
    for (int b = 0; b < kBands; ++b)
      for (int o = 0; o < kOrientations; ++o)
        for (std::size_t i = 0; i < emb.map(b, o).values().size(); ++i) {
          EXPECT_GE(emb.map(b, o).values()[i], plain.map(b, o).values()[i]);
          EXPECT_LE(emb.map(b, o).values()[i], 2.0 * plain.map(b, o).values()[i]);
        }
  }
}

TEST(S2, ResponseValues) {
  C1Response c1;
  for (int b = 0; b < kBands; ++b)
    for (int o = 0; o < kOrientations; ++o) c1.map(b, o) = Matrix(4, 4, 0.0);
  c1.map(0, 2)(1, 1) = 1.0;
  Prototype p;
  p.size = 4;
  p.band = 1;
  p.tensor.assign(64, 0.0f);
  p.tensor[static_cast<std::size_t>((1 * 4 + 1) * 4 + 2)] = 1.0f;
  PrototypeSet set{{p}, PrototypeOrigin::random, 0};

  EXPECT_DOUBLE_EQ(patch_distance_sq(c1, 0, 0, 0, p), 0.0);
  EXPECT_DOUBLE_EQ(patch_distance_sq(c1, 1, 0, 0, p), 1.0);
  const S2Response s2 = s2_layer(c1, set, 1.0);
  EXPECT_DOUBLE_EQ(s2.maps[0][0](0, 0), 1.0);
  EXPECT_NEAR(s2.maps[0][1](0, 0), 0.3679, 1e-4);
  EXPECT_DOUBLE_EQ(s2.maps[0][1](0, 0), std::exp(-1.0));
  EXPECT_EQ(c2_layer(s2), C2Vector{1.0});
  EXPECT_THROW(s2_layer(c1, set, 0.0), Error);
  EXPECT_THROW(c2_from_c1(c1, set, -1.0), Error);
}

TEST(S2, MatchesTripleLoopAndFusedPath) {
  Rng rng(6);
  std::vector<std::pair<int, int>> dims{{20, 18}, {16, 15}, {13, 12}, {11, 10}, {9, 8}, {7, 7}, {5, 6}, {3, 4}};
  for (int trial = 0; trial < 3; ++trial) {
    const C1Response c1 = random_c1(dims, rng);
    PrototypeSet set;
    for (int n : {4, 8, 12, 16, 4}) set.prototypes.push_back(random_prototype(n, rng));
    const double beta = 0.05 + uniform_unit(rng);
    const S2Response s2 = s2_layer(c1, set, beta);
    ASSERT_EQ(s2.maps.size(), set.size());
    for (std::size_t k = 0; k < set.size(); ++k) {
      const Prototype& p = set.prototypes[k];
      for (int b = 0; b < kBands; ++b) {
        const ResponseMap& m = s2.maps[k][static_cast<std::size_t>(b)];
        if (c1.rows(b) < p.size || c1.cols(b) < p.size) {
          EXPECT_EQ(m.rows() * m.cols(), 0);
          continue;
        }
        ASSERT_EQ(m.rows(), c1.rows(b) - p.size + 1);
        ASSERT_EQ(m.cols(), c1.cols(b) - p.size + 1);
        for (int r = 0; r < m.rows(); ++r)
          for (int c = 0; c < m.cols(); ++c)
            EXPECT_NEAR(m(r, c), std::exp(-beta * oracle::patch_distance_sq(c1, b, r, c, p)), 1e-12);
      }
    }
    const C2Vector c2 = c2_layer(s2);
    EXPECT_EQ(c2_from_c1(c1, set, beta), c2);
    const auto expected = oracle::brute_force_c2(c1, set, beta);
    for (std::size_t k = 0; k < c2.size(); ++k) EXPECT_NEAR(c2[k], expected[k], 1e-12);
  }
}

TEST(C2, OversizedPrototypeContributesZero) {
  Rng rng(7);
  const C1Response c1 = random_c1({{10, 10}, {9, 9}, {8, 8}, {7, 7}, {6, 6}, {5, 5}, {4, 4}, {3, 3}}, rng);
  PrototypeSet set{{random_prototype(12, rng), random_prototype(4, rng)}, PrototypeOrigin::random, 0};
  const C2Vector c2 = c2_from_c1(c1, set, 1.0);
  EXPECT_EQ(c2[0], 0.0);
  EXPECT_GT(c2[1], 0.0);
  EXPECT_EQ(c2_layer(s2_layer(c1, set, 1.0)), c2);
}

TEST(C2, UniformResponses) {
  C1Response c1;
  for (int b = 0; b < kBands; ++b)
    for (int o = 0; o < kOrientations; ++o) c1.map(b, o) = Matrix(12 - b, 12 - b, 0.5);
  Prototype p;
  p.size = 4;
  p.tensor.assign(64, 0.25f);
  const C2Vector c2 = c2_from_c1(c1, {{p, p}, PrototypeOrigin::random, 0}, 0.5);
  const double r = std::exp(-0.5 * 64 * 0.0625);
  for (double v : c2) EXPECT_NEAR(v, r, 1e-15);
}

TEST(C2, PermutationEquivariant) {
  Rng rng(8);
  const C1Response c1 =
      random_c1({{20, 20}, {18, 18}, {16, 16}, {14, 14}, {12, 12}, {10, 10}, {8, 8}, {6, 6}}, rng);
  PrototypeSet set;
  for (int n : {4, 8, 12, 4, 16}) set.prototypes.push_back(random_prototype(n, rng));
  const C2Vector base = c2_from_c1(c1, set, 0.3);
  PrototypeSet reversed = set;
  std::reverse(reversed.prototypes.begin(), reversed.prototypes.end());
  C2Vector expect = base;
  std::reverse(expect.begin(), expect.end());
  EXPECT_EQ(c2_from_c1(c1, reversed, 0.3), expect);
}

TEST(Features, SelfSampledPrototypesMatch) {
  const GrayImage img = bench_image(72, 3);
  const GaborBank bank = make_bank(true);
  FeatureConfig cfg;
  cfg.conv = ConvMode::separable;
  const C1Response c1 = compute_c1(img, bank, cfg);
  const std::vector<C1Response> pool{c1};
  const int sizes[] = {4, 8};
  const PrototypeSet protos = sample_random_prototypes(pool, 3, sizes, 1);
  const C2Vector a = extract_features(img, bank, protos, cfg);
  ASSERT_EQ(a.size(), protos.size());
  EXPECT_EQ(a, extract_features(img, bank, protos, cfg));
  // float storage of the prototype leaves a tiny residual distance
  for (double v : a) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(Features, SmallShiftsMoveC2LessThanLargeShifts) {
  const GrayImage big = bench_image(200, 21);
  const GrayImage base = crop(big, 0, 0, 120, 120);
  const GaborBank bank = make_bank(true);
  FeatureConfig cfg;
  cfg.conv = ConvMode::separable;
  const int sizes[] = {4, 8};
  const std::vector<C1Response> pool{compute_c1(crop(big, 60, 60, 120, 120), bank, cfg)};
  const PrototypeSet protos = sample_random_prototypes(pool, 10, sizes, 5);
  const C2Vector ref = extract_features(base, bank, protos, cfg);
  const double near = l2(ref, extract_features(crop(big, 3, 3, 120, 120), bank, protos, cfg));
  const double far = l2(ref, extract_features(crop(big, 32, 32, 120, 120), bank, protos, cfg));
  EXPECT_LT(near, far);
}
