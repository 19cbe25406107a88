#include "hmax/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "hmax/error.hpp"
#include "hmax/imgproc.hpp"
#include "hmax/learning.hpp"
#include "hmax/parallel.hpp"
#include "hmax/random.hpp"

namespace hmax {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Above this many images the C1 maps are recomputed per run instead of kept.
constexpr std::size_t kCacheLimit = 2000;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

Classifier train_classifier(const ExperimentConfig& cfg, const LabeledFeatures& train, std::uint64_t seed) {
  if (cfg.classifier == ClassifierKind::nn) return train_nn(train);
  return train_linear_svm(train, SvmHyper{cfg.svm_c, cfg.svm_epochs, seed});
}

}  // namespace

LayerTimings& LayerTimings::operator+=(const LayerTimings& o) {
  load += o.load;
  preprocess += o.preprocess;
  s1 += o.s1;
  c1 += o.c1;
  prototypes += o.prototypes;
  s2c2 += o.s2c2;
  train += o.train;
  evaluate += o.evaluate;
  return *this;
}

GrayImage load_input(const std::filesystem::path& path, int target_height) {
  return resize_height(load_grayscale(path), target_height);
}

C1Response image_c1(const GrayImage& img, const GaborBank& bank, const FeatureConfig& cfg, LayerTimings* timings) {
  auto t = Clock::now();
  const GrayImage input = cfg.combine ? combined_image(img, *cfg.combine, cfg.clahe) : img;
  const double t_pre = seconds_since(t);
  t = Clock::now();
  const S1Response s1 = s1_layer(input, bank, cfg.conv);
  const double t_s1 = seconds_since(t);
  t = Clock::now();
  C1Response c1 = cfg.embed.mode == EmbedMode::off ? c1_layer(s1, cfg.c1) : c1_layer_embedded(s1, cfg.c1, cfg.embed);
  if (timings) {
    timings->preprocess += t_pre;
    timings->s1 += t_s1;
    timings->c1 += seconds_since(t);
  }
  return c1;
}

std::vector<C1Response> samples_c1(std::span<const Sample> samples, const ExperimentConfig& cfg,
                                   const GaborBank& bank, int jobs, LayerTimings* timings) {
  const FeatureConfig fc = cfg.feature_config();
  std::vector<C1Response> out(samples.size());
  std::vector<LayerTimings> per_image(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    try {
      const auto t = Clock::now();
      const GrayImage img = load_input(samples[i].path, cfg.target_height);
      per_image[i].load += seconds_since(t);
      out[i] = image_c1(img, bank, fc, &per_image[i]);
    } catch (const Error& e) {
      const std::string what = e.what();
      const std::string path = samples[i].path.string();
      // load_grayscale already prefixes the path
      throw Error(e.kind(), what.rfind(path, 0) == 0 ? what : path + ": " + what);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::numerical, samples[i].path.string() + ": " + e.what());
    }
  });
  if (timings)
    for (const auto& t : per_image) *timings += t;
  return out;
}

std::size_t count_isolation_violations(std::span<const Sample> learning_inputs, std::span<const Sample> test) {
  std::set<std::filesystem::path> test_paths;
  for (const Sample& s : test) test_paths.insert(s.path);
  std::size_t n = 0;
  for (const Sample& s : learning_inputs) n += test_paths.count(s.path);
  return n;
}

PrototypeSet learn_prototypes(const ExperimentConfig& cfg, std::span<const C1Response> train_c1,
                              std::span<const int> labels, std::size_t category_count, std::uint64_t seed) {
  require(train_c1.size() == labels.size(), ErrorKind::invalid_argument, "one label per C1 map required");
  require(!train_c1.empty(), ErrorKind::data, "no training images for prototype learning");
  switch (cfg.prototype_source) {
    case PrototypeSourceKind::random: {
      SamplingOptions opts;
      opts.bands = cfg.bands;
      return sample_random_prototypes(train_c1, cfg.count_per_size, cfg.sizes, seed, opts);
    }
    case PrototypeSourceKind::pam: {
      std::vector<std::vector<C1Response>> per_category(category_count);
      for (std::size_t i = 0; i < train_c1.size(); ++i) {
        const auto label = static_cast<std::size_t>(labels[i]);
        require(label < category_count, ErrorKind::invalid_argument, "label out of range");
        per_category[label].push_back(train_c1[i]);
      }
      return pam_prototypes(per_category, cfg.pam_config(), seed).prototypes;
    }
    case PrototypeSourceKind::file:
      return load_prototypes(cfg.prototype_file);
  }
  fail(ErrorKind::config, "unknown prototype source");
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int jobs = resolve_jobs(cfg.jobs);
  const Dataset ds = ingest_dataset(cfg.dataset_root);
  const GaborBank bank = make_bank(cfg.conv_mode == ConvMode::separable, cfg.gabor_options());
  const FeatureConfig fc = cfg.feature_config();
  const std::size_t ncat = ds.categories.size();

  RunReport report;
  report.categories = ds.categories;
  report.config_text = cfg.to_text();
  report.warnings = ds.warnings;
  report.confusion.assign(ncat, std::vector<std::size_t>(ncat, 0));

  std::vector<std::size_t> offset(ncat + 1, 0);
  for (std::size_t c = 0; c < ncat; ++c) offset[c + 1] = offset[c] + ds.images[c].size();
  auto global_id = [&](const Sample& s) { return offset[static_cast<std::size_t>(s.label)] + s.category_index; };

  // Every image is in train or test on every run, so a cache is filled once.
  std::vector<C1Response> cache;
  if (ds.image_count() <= kCacheLimit) {
    std::vector<Sample> all;
    for (std::size_t c = 0; c < ncat; ++c)
      for (std::size_t i = 0; i < ds.images[c].size(); ++i) all.push_back({ds.images[c][i], static_cast<int>(c), i});
    cache = samples_c1(all, cfg, bank, jobs, &report.timings);
  }
  auto c1_for = [&](std::span<const Sample> samples) {
    if (cache.empty()) return samples_c1(samples, cfg, bank, jobs, &report.timings);
    std::vector<C1Response> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back(cache[global_id(s)]);
    return out;
  };

  std::optional<PrototypeSet> fixed;
  if (cfg.prototype_source == PrototypeSourceKind::file) {
    const auto t = Clock::now();
    fixed = load_prototypes(cfg.prototype_file);
    report.timings.prototypes += seconds_since(t);
  }

  std::vector<double> class_sum(ncat, 0.0);
  std::vector<int> class_runs(ncat, 0);
  std::set<std::string> seen_warnings(report.warnings.begin(), report.warnings.end());

  for (int r = 0; r < cfg.runs; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    const Split split = split_dataset(ds, cfg.n_train_per_class, seed);
    for (const auto& w : split.warnings)
      if (seen_warnings.insert(w).second) report.warnings.push_back(w);

    const std::vector<C1Response> train_c1 = c1_for(split.train);
    std::vector<int> train_labels;
    for (const Sample& s : split.train) train_labels.push_back(s.label);

    auto t = Clock::now();
    PrototypeSet protos;
    if (fixed) {
      protos = *fixed;
    } else {
      report.isolation_violations += count_isolation_violations(split.train, split.test);
      protos = learn_prototypes(cfg, train_c1, train_labels, ncat, mix_seed(seed, 0x70726f746fULL));
    }
    report.timings.prototypes += seconds_since(t);
    require(protos.size() > 0, ErrorKind::data, "prototype set is empty");

    t = Clock::now();
    LabeledFeatures train{std::vector<C2Vector>(train_c1.size()), train_labels};
    parallel_for(train_c1.size(), jobs,
                 [&](std::size_t i) { train.vectors[i] = c2_from_c1(train_c1[i], protos, cfg.beta); });

    LabeledFeatures test;
    test.vectors.resize(split.test.size());
    for (const Sample& s : split.test) test.labels.push_back(s.label);
    report.timings.s2c2 += seconds_since(t);
    if (cache.empty()) {
      // stream the test set so its C1 maps are never all resident
      constexpr std::size_t kChunk = 256;
      for (std::size_t lo = 0; lo < split.test.size(); lo += kChunk) {
        const auto chunk = std::span<const Sample>(split.test).subspan(lo, std::min(kChunk, split.test.size() - lo));
        const auto c1 = samples_c1(chunk, cfg, bank, jobs, &report.timings);
        t = Clock::now();
        parallel_for(c1.size(), jobs,
                     [&](std::size_t i) { test.vectors[lo + i] = c2_from_c1(c1[i], protos, cfg.beta); });
        report.timings.s2c2 += seconds_since(t);
      }
    } else {
      t = Clock::now();
      parallel_for(split.test.size(), jobs, [&](std::size_t i) {
        test.vectors[i] = c2_from_c1(cache[global_id(split.test[i])], protos, cfg.beta);
      });
      report.timings.s2c2 += seconds_since(t);
    }

    t = Clock::now();
    const Classifier model = train_classifier(cfg, train, seed);
    report.timings.train += seconds_since(t);

    t = Clock::now();
    RunResult result;
    result.run = r;
    result.seed = seed;
    result.n_train = train.size();
    result.n_test = test.size();
    result.prototype_count = protos.size();
    result.report = evaluate(model, test);
    report.timings.evaluate += seconds_since(t);

    const AccuracyReport& acc = result.report;
    for (std::size_t i = 0; i < acc.classes.size(); ++i) {
      const auto ti = static_cast<std::size_t>(acc.classes[i]);
      for (std::size_t j = 0; j < acc.classes.size(); ++j)
        report.confusion[ti][static_cast<std::size_t>(acc.classes[j])] += acc.confusion[i][j];
      if (!std::isnan(acc.per_class_accuracy[i])) {
        class_sum[ti] += acc.per_class_accuracy[i];
        ++class_runs[ti];
      }
    }
    report.runs.push_back(std::move(result));
  }

  double sum = 0.0;
  for (const auto& run : report.runs) sum += run.report.accuracy;
  report.mean_accuracy = sum / static_cast<double>(report.runs.size());
  report.per_class_accuracy.resize(ncat);
  for (std::size_t c = 0; c < ncat; ++c)
    report.per_class_accuracy[c] =
        class_runs[c] > 0 ? class_sum[c] / class_runs[c] : std::numeric_limits<double>::quiet_NaN();
  return report;
}

std::string report_csv(const RunReport& report) {
  std::string out = "run,seed,accuracy\n";
  for (const auto& run : report.runs)
    out += std::to_string(run.run) + "," + std::to_string(run.seed) + "," + format_double(run.report.accuracy) + "\n";
  out += "mean,," + format_double(report.mean_accuracy) + "\n";
  return out;
}

std::string confusion_csv(const RunReport& report) {
  std::string out = "true,pred,count\n";
  for (std::size_t t = 0; t < report.confusion.size(); ++t)
    for (std::size_t p = 0; p < report.confusion[t].size(); ++p)
      if (report.confusion[t][p] > 0)
        out += csv_field(report.categories[t]) + "," + csv_field(report.categories[p]) + "," +
               std::to_string(report.confusion[t][p]) + "\n";
  return out;
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "confusion.csv", confusion_csv(report));

  using nlohmann::json;
  json j;
  j["format_version"] = 1;
  j["categories"] = report.categories;
  json runs = json::array();
  for (const auto& run : report.runs)
    runs.push_back({{"run", run.run},
                    {"seed", run.seed},
                    {"accuracy", run.report.accuracy},
                    {"n_train", run.n_train},
                    {"n_test", run.n_test},
                    {"prototypes", run.prototype_count}});
  j["runs"] = runs;
  j["mean_accuracy"] = report.mean_accuracy;
  json per_class = json::object();
  for (std::size_t c = 0; c < report.categories.size(); ++c)
    per_class[report.categories[c]] =
        std::isnan(report.per_class_accuracy[c]) ? json(nullptr) : json(report.per_class_accuracy[c]);
  j["per_class_accuracy"] = per_class;
  j["confusion_csv"] = "confusion.csv";
  const LayerTimings& t = report.timings;
  j["timings_s"] = {{"load", t.load},         {"preprocess", t.preprocess}, {"s1", t.s1},
                    {"c1", t.c1},             {"prototypes", t.prototypes}, {"s2c2", t.s2c2},
                    {"train", t.train},       {"evaluate", t.evaluate}};
  j["isolation_violations"] = report.isolation_violations;
  j["warnings"] = report.warnings;
  j["config"] = report.config_text;
  write_text(dir / "summary.json", j.dump(2) + "\n");
}

}  // namespace hmax
