#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hmax/classify.hpp"
#include "hmax/config.hpp"
#include "hmax/dataset.hpp"
#include "hmax/gabor.hpp"
#include "hmax/layers.hpp"
#include "hmax/prototype.hpp"

namespace hmax {

/// Accumulated wall time per stage, in seconds, summed over all images and runs.
struct LayerTimings {
  double load = 0.0;        ///< decode + resize
  double preprocess = 0.0;  ///< combined image
  double s1 = 0.0;
  double c1 = 0.0;
  double prototypes = 0.0;  ///< learning or loading
  double s2c2 = 0.0;
  double train = 0.0;
  double evaluate = 0.0;

  LayerTimings& operator+=(const LayerTimings& o);
};

struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t prototype_count = 0;
  AccuracyReport report;
};

struct RunReport {
  std::vector<std::string> categories;
  std::vector<RunResult> runs;
  double mean_accuracy = 0.0;
  /// Per category: mean over the runs in which it had test images.
  std::vector<double> per_class_accuracy;
  /// [true][pred] summed over runs, indexed by category id.
  std::vector<std::vector<std::size_t>> confusion;
  LayerTimings timings;
  std::string config_text;
  /// Test images handed to prototype learning; anything but 0 is a bug.
  std::size_t isolation_violations = 0;
  std::vector<std::string> warnings;
};

/// Load, convert to grayscale and resize to `target_height`.
GrayImage load_input(const std::filesystem::path& path, int target_height);

/// Preprocessing, S1 and C1 for one image, adding stage times to `timings`.
C1Response image_c1(const GrayImage& img, const GaborBank& bank, const FeatureConfig& cfg,
                    LayerTimings* timings = nullptr);

/// C1 maps for a list of samples, computed on `jobs` workers. Failures are
/// rethrown with the image path in the message.
std::vector<C1Response> samples_c1(std::span<const Sample> samples, const ExperimentConfig& cfg,
                                   const GaborBank& bank, int jobs, LayerTimings* timings = nullptr);

/// Counts the entries of `learning_inputs` whose path also appears in `test`.
std::size_t count_isolation_violations(std::span<const Sample> learning_inputs, std::span<const Sample> test);

/// Prototype learning from training C1 maps only. `labels` gives the category
/// of each map and is used by PAM to form per-category pools.
PrototypeSet learn_prototypes(const ExperimentConfig& cfg, std::span<const C1Response> train_c1,
                              std::span<const int> labels, std::size_t category_count, std::uint64_t seed);

/// Seeded end-to-end protocol: for run r the seed is cfg.seed + r.
RunReport run_experiment(const ExperimentConfig& cfg);

/// report.csv, confusion.csv and summary.json in `dir`. The two CSVs depend
/// only on the config and seed; timings go to summary.json.
void write_report(const RunReport& report, const std::filesystem::path& dir);

std::string report_csv(const RunReport& report);
std::string confusion_csv(const RunReport& report);

}  // namespace hmax
