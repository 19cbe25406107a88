#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hmax/classify.hpp"
#include "hmax/error.hpp"
#include "oracles.hpp"

using namespace hmax;

namespace {

LabeledFeatures random_features(std::size_t n, std::size_t dim, int classes, Rng& rng) {
  LabeledFeatures f;
  for (std::size_t i = 0; i < n; ++i) {
    C2Vector v(dim);
    for (double& x : v) x = uniform_unit(rng);
    f.vectors.push_back(std::move(v));
    f.labels.push_back(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(classes))));
  }
  return f;
}

// Two clouds in 3-D separated along the first axis by a gap much wider than
// their spread, so the standardized margin exceeds 1.
LabeledFeatures two_clouds(Rng& rng) {
  LabeledFeatures f;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    const double centre = label == 0 ? -3.0 : 3.0;
    f.vectors.push_back({centre + 0.2 * (uniform_unit(rng) - 0.5), uniform_unit(rng), uniform_unit(rng)});
    f.labels.push_back(label);
  }
  return f;
}

}  // namespace

TEST(NearestNeighbour, BasicCases) {
  LabeledFeatures one{{{1.0, 2.0}}, {7}};
  const NNModel m = train_nn(one);
  EXPECT_EQ(m.exemplars.size(), 1u);
  EXPECT_EQ(predict_nn(m, std::vector<double>{5.0, 5.0}), 7);

  const NNModel two = train_nn({{{0.0, 0.0}, {2.0, 0.0}, {0.0, 5.0}}, {3, 1, 2}});
  EXPECT_EQ(predict_nn(two, std::vector<double>{2.0, 0.0}), 1);
  EXPECT_EQ(predict_nn(two, std::vector<double>{1.0, 0.0}), 3);  // equidistant: lower index wins
  EXPECT_THROW(predict_nn(two, std::vector<double>{1.0}), Error);
  EXPECT_THROW(train_nn({}), Error);
}

TEST(NearestNeighbour, MatchesFullScanAndIgnoresOrder) {
  Rng rng(1);
  const LabeledFeatures train = random_features(50, 6, 4, rng);
  const NNModel model = train_nn(train);

  std::vector<std::size_t> perm(train.size());
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  LabeledFeatures permuted;
  for (std::size_t i : perm) {
    permuted.vectors.push_back(train.vectors[i]);
    permuted.labels.push_back(train.labels[i]);
  }
  const NNModel shuffled = train_nn(permuted);

  for (int q = 0; q < 100; ++q) {
    C2Vector v(6);
    for (double& x : v) x = uniform_unit(rng);
    const int expected = oracle::full_scan_nn(train.vectors, train.labels, v);
    EXPECT_EQ(predict_nn(model, v), expected);
    EXPECT_EQ(predict_nn(shuffled, v), expected);
  }
}

TEST(LinearSvm, SeparatesTwoClouds) {
  Rng rng(2);
  const LabeledFeatures data = two_clouds(rng);
  std::vector<double> trace;
  const SVMModel model = train_linear_svm(data, {1.0, 50, 3}, &trace);
  const AccuracyReport r = evaluate(Classifier{model}, data);
  EXPECT_EQ(r.accuracy, 1.0);
  ASSERT_EQ(trace.size(), 50u);
  EXPECT_LT(trace.back(), trace.front());
  EXPECT_EQ(train_linear_svm(data, {1.0, 50, 3}), model);
}

TEST(LinearSvm, ThreeClassesOneVsRest) {
  Rng rng(3);
  LabeledFeatures data;
  const double centres[3][2] = {{0, 0}, {4, 0}, {0, 4}};
  for (int i = 0; i < 60; ++i) {
    const int c = i % 3;
    data.vectors.push_back({centres[c][0] + uniform_unit(rng) * 0.5, centres[c][1] + uniform_unit(rng) * 0.5});
    data.labels.push_back(c + 10);
  }
  const SVMModel model = train_linear_svm(data, {10.0, 100, 0});
  EXPECT_EQ(model.classes, (std::vector<int>{10, 11, 12}));
  EXPECT_GE(evaluate(Classifier{model}, data).accuracy, 0.95);
}

TEST(LinearSvm, BiasArgmaxAndShiftInvariance) {
  SVMModel m;
  m.classes = {0, 1};
  m.weights = {{0.0, 0.0}, {0.0, 0.0}};
  m.bias = {0.1, 0.2};
  m.mean = {0.0, 0.0};
  m.scale = {1.0, 1.0};
  EXPECT_EQ(predict_svm(m, std::vector<double>{3.0, -1.0}), 1);
  for (double& b : m.bias) b += 5.0;
  EXPECT_EQ(predict_svm(m, std::vector<double>{3.0, -1.0}), 1);
  m.bias = {0.3, 0.3};
  EXPECT_EQ(predict_svm(m, std::vector<double>{3.0, -1.0}), 0);  // tie: lowest class
}

TEST(LinearSvm, Errors) {
  EXPECT_THROW(train_linear_svm({{{1.0}, {2.0}}, {0, 0}}, {}), Error);
  EXPECT_THROW(train_linear_svm({{{1.0}, {2.0}}, {0, 1}}, {0.0, 10, 0}), Error);
  EXPECT_THROW(train_linear_svm({{{1.0}, {2.0, 3.0}}, {0, 1}}, {}), Error);
  EXPECT_THROW(train_linear_svm({{{1.0}, {NAN}}, {0, 1}}, {}), Error);
}

TEST(Evaluate, CountingIdentities) {
  const LabeledFeatures zeros{{{0.0}, {1.0}, {2.0}}, {0, 0, 0}};
  EXPECT_EQ(evaluate([](std::span<const double>) { return 0; }, zeros).accuracy, 1.0);
  EXPECT_EQ(evaluate([](std::span<const double>) { return 1; }, zeros).accuracy, 0.0);

  Rng rng(4);
  const LabeledFeatures test = random_features(80, 3, 4, rng);
  const AccuracyReport r =
      evaluate([](std::span<const double> v) { return v[0] < 0.3 ? 0 : (v[1] < 0.5 ? 1 : 5); }, test);
  EXPECT_EQ(r.total, 80u);
  EXPECT_GE(r.accuracy, 0.0);
  EXPECT_LE(r.accuracy, 1.0);
  std::size_t trace = 0;
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    trace += r.confusion[i][i];
    const auto row = std::accumulate(r.confusion[i].begin(), r.confusion[i].end(), std::size_t{0});
    EXPECT_EQ(row, static_cast<std::size_t>(std::count(test.labels.begin(), test.labels.end(), r.classes[i])));
  }
  EXPECT_DOUBLE_EQ(static_cast<double>(trace) / 80.0, r.accuracy);
  // class 5 is only ever predicted
  const auto it = std::find(r.classes.begin(), r.classes.end(), 5);
  ASSERT_NE(it, r.classes.end());
  EXPECT_TRUE(std::isnan(r.per_class_accuracy[static_cast<std::size_t>(it - r.classes.begin())]));
  EXPECT_THROW(evaluate([](std::span<const double>) { return 0; }, LabeledFeatures{}), Error);
}

TEST(ModelFile, RoundTripBothKinds) {
  Rng rng(5);
  const LabeledFeatures data = random_features(30, 4, 3, rng);
  const Classifier nn = train_nn(data);
  const Classifier svm = train_linear_svm(data, {2.0, 20, 1});
  for (const Classifier& m : {nn, svm}) {
    const auto bytes = encode_model(m);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "HMXM");
    const Classifier back = decode_model(bytes);
    EXPECT_EQ(back.index(), m.index());
    EXPECT_EQ(back, m);
  }
  auto bytes = encode_model(svm);
  bytes[8] = 7;  // kind
  EXPECT_THROW(decode_model(bytes), Error);
  EXPECT_THROW(decode_model(std::vector<std::uint8_t>{'H', 'M'}), Error);
}
