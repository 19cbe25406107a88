#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "hmax/layers.hpp"

namespace hmax {

struct LabeledFeatures {
  std::vector<C2Vector> vectors;
  std::vector<int> labels;

  std::size_t size() const noexcept { return vectors.size(); }
  std::size_t dim() const noexcept { return vectors.empty() ? 0 : vectors.front().size(); }
  /// Equal lengths, uniform dimension, finite values.
  void validate() const;
};

/// 1-NN exemplar memory.
struct NNModel {
  std::vector<C2Vector> exemplars;
  std::vector<int> labels;

  bool operator==(const NNModel&) const = default;
};

NNModel train_nn(const LabeledFeatures& data);

/// Label of the Euclidean-nearest exemplar; ties go to the lower exemplar index.
int predict_nn(const NNModel& model, std::span<const double> v);

struct SvmHyper {
  double C = 1.0;
  int epochs = 50;
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVM over standardized features.
struct SVMModel {
  std::vector<int> classes;                  ///< sorted class ids
  std::vector<std::vector<double>> weights;  ///< one per class
  std::vector<double> bias;
  std::vector<double> mean;   ///< standardization
  std::vector<double> scale;  ///< 1 / std (1 where a feature is constant)
  double C = 1.0;

  bool operator==(const SVMModel&) const = default;
};

/// Seeded Pegasos-style stochastic subgradient descent on
///   lambda/2 |w|^2 + mean(max(0, 1 - y (w.x + b))),  lambda = 1 / (C n),
/// per class against the rest. The bias rides along as a constant feature.
/// The returned weights are the running average of all iterates.
///
/// `objective_trace`, when given, receives the mean over classes of the
/// objective evaluated at the averaged iterate after every epoch.
SVMModel train_linear_svm(const LabeledFeatures& data, const SvmHyper& hyper,
                          std::vector<double>* objective_trace = nullptr);

/// Per-class scores w . x_std + b.
std::vector<double> svm_scores(const SVMModel& model, std::span<const double> v);

/// Argmax class id; ties go to the lowest class id.
int predict_svm(const SVMModel& model, std::span<const double> v);

using Classifier = std::variant<NNModel, SVMModel>;

int predict(const Classifier& model, std::span<const double> v);

struct AccuracyReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<int> classes;                      ///< union of true and predicted labels, sorted
  std::vector<double> per_class_accuracy;        ///< per entry of `classes`; NaN when absent from the test set
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][pred] over `classes`
};

using Predictor = std::function<int(std::span<const double>)>;

AccuracyReport evaluate(const Predictor& predictor, const LabeledFeatures& test);
AccuracyReport evaluate(const Classifier& model, const LabeledFeatures& test);

// Binary format, little-endian:
//   "HMXM" | u32 version | u32 kind (0 = nn, 1 = svm) | u32 dim | u32 count
//   nn:  count x (i32 label | dim x f64)
//   svm: f64 C | dim x f64 mean | dim x f64 scale | count x (i32 class | f64 bias | dim x f64 weights)
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const Classifier& model);
Classifier decode_model(std::span<const std::uint8_t> bytes);
void save_model(const Classifier& model, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);

}  // namespace hmax
