#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hmax/gabor.hpp"
#include "hmax/imgproc.hpp"
#include "hmax/layers.hpp"
#include "hmax/learning.hpp"

namespace hmax {

enum class PrototypeSourceKind { random, pam, file };
enum class ClassifierKind { nn, svm };
enum class EmbedPreset { off, opt1, opt2, opt3 };

EmbedRule embed_rule(EmbedPreset preset);

/// Every knob of an experiment. The defaults are the standard Caltech101
/// protocol (30 training images per class, 140 px height, 3 runs, 500
/// prototypes per size); docs/config.md lists them all.
struct ExperimentConfig {
  std::filesystem::path dataset_root;
  int n_train_per_class = 30;
  int target_height = 140;

  ConvMode conv_mode = ConvMode::dense;
  SigmaMode sigma_mode = SigmaMode::lambda_ratio;
  bool preprocess_combined = false;
  CombineParams combine;
  ClaheParams clahe;

  EmbedPreset c1_embed = EmbedPreset::off;
  Overlap c1_overlap = Overlap::half;

  PrototypeSourceKind prototype_source = PrototypeSourceKind::random;
  std::filesystem::path prototype_file;
  int count_per_size = 500;
  std::vector<int> sizes{4, 8, 12, 16};
  std::vector<int> bands = all_bands();
  PamConfig pam;

  double beta = 1.0;

  ClassifierKind classifier = ClassifierKind::svm;
  double svm_c = 1.0;
  int svm_epochs = 50;

  int runs = 3;
  std::uint64_t seed = 0;
  int jobs = 0;  ///< 0: HMAX_JOBS, else hardware concurrency
  std::filesystem::path output_dir;

  /// Assigns one field from its textual form; throws ErrorKind::config for an
  /// unknown key or an unparsable value.
  void set(std::string_view key, std::string_view value);

  void validate() const;

  FeatureConfig feature_config() const;
  GaborOptions gabor_options() const { return {sigma_mode}; }
  PamConfig pam_config() const;

  /// `key = value` lines in a fixed order; parses back to the same config.
  std::string to_text() const;

  /// Names accepted by `set`.
  static const std::vector<std::string>& keys();
};

/// Flat `key = value` text; `#` starts a comment; string values may be quoted;
/// lists are comma separated, optionally in [brackets]. Applied on top of `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Worker count: explicit value if positive, else HMAX_JOBS, else hardware threads.
int resolve_jobs(int requested);

std::vector<int> parse_int_list(std::string_view text);

}  // namespace hmax
