#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmax/bench.hpp"
#include "hmax/error.hpp"
#include "hmax/experiment.hpp"
#include "hmax/imgproc.hpp"
#include "hmax/synthetic.hpp"
#include "tempdir.hpp"

using namespace hmax;
using hmax::testing::TempDir;
namespace fs = std::filesystem;

namespace {

void touch_image(const fs::path& path, double value = 0.5) {
  fs::create_directories(path.parent_path());
  save_pgm(GrayImage::filled(8, 8, value), path);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& root) {
  ExperimentConfig cfg;
  cfg.dataset_root = root;
  cfg.n_train_per_class = 4;
  cfg.target_height = 48;
  cfg.conv_mode = ConvMode::separable;
  cfg.count_per_size = 5;
  cfg.sizes = {4, 8};
  cfg.classifier = ClassifierKind::nn;
  cfg.runs = 3;
  cfg.seed = 11;
  cfg.jobs = 1;
  return cfg;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.per_class = 6;
  s.min_size = 48;
  s.max_size = 64;
  s.seed = 3;
  return s;
}

}  // namespace

TEST(Dataset, IngestsCategoryDirectories) {
  TempDir dir;
  for (const char* cat : {"zebra", "apple"})
    for (int i = 0; i < 3; ++i) touch_image(dir / (std::string(cat) + "/img" + std::to_string(i) + ".pgm"));
  std::ofstream(dir / "apple/notes.txt") << "not an image";
  std::ofstream(dir / "README") << "loose file";

  const Dataset ds = ingest_dataset(dir.path());
  EXPECT_EQ(ds.categories, (std::vector<std::string>{"apple", "zebra"}));
  ASSERT_EQ(ds.images.size(), 2u);
  EXPECT_EQ(ds.images[0].size(), 3u);
  EXPECT_EQ(ds.image_count(), 6u);
  EXPECT_TRUE(std::is_sorted(ds.images[1].begin(), ds.images[1].end()));
  EXPECT_TRUE(ds.warnings.empty());
}

TEST(Dataset, SmallCategoriesAndErrors) {
  TempDir dir;
  touch_image(dir / "lonely/a.pgm");
  touch_image(dir / "pair/a.pgm");
  touch_image(dir / "pair/b.png");
  fs::create_directories(dir / "empty");
  const Dataset ds = ingest_dataset(dir.path());
  EXPECT_EQ(ds.categories, (std::vector<std::string>{"pair"}));
  ASSERT_EQ(ds.warnings.size(), 1u);
  EXPECT_NE(ds.warnings[0].find("lonely"), std::string::npos);

  EXPECT_TRUE(is_image_file("x.JPG"));
  EXPECT_TRUE(is_image_file("x.jpeg"));
  EXPECT_FALSE(is_image_file("x.bmp"));

  try {
    ingest_dataset(dir / "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
  TempDir bare;
  fs::create_directories(bare / "one");
  touch_image(bare / "one/a.pgm");
  try {
    ingest_dataset(bare.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
}

TEST(Split, ThirtyOfThirtyOne) {
  Dataset ds;
  ds.categories = {"a", "b"};
  ds.images.resize(2);
  for (int i = 0; i < 31; ++i) ds.images[0].push_back("a/" + std::to_string(100 + i) + ".pgm");
  for (int i = 0; i < 50; ++i) ds.images[1].push_back("b/" + std::to_string(100 + i) + ".pgm");

  const Split s = split_dataset(ds, 30, 5);
  auto count = [](const std::vector<Sample>& v, int label) {
    return std::count_if(v.begin(), v.end(), [&](const Sample& x) { return x.label == label; });
  };
  EXPECT_EQ(count(s.train, 0), 30);
  EXPECT_EQ(count(s.test, 0), 1);
  EXPECT_EQ(count(s.train, 1), 30);
  EXPECT_EQ(count(s.test, 1), 20);
  EXPECT_TRUE(s.warnings.empty());

  std::set<fs::path> train_paths;
  for (const Sample& x : s.train) train_paths.insert(x.path);
  for (const Sample& x : s.test) EXPECT_EQ(train_paths.count(x.path), 0u);
  EXPECT_EQ(train_paths.size() + s.test.size(), 81u);
  for (const Sample& x : s.train)
    EXPECT_EQ(ds.images[static_cast<std::size_t>(x.label)][x.category_index], x.path);

  const Split again = split_dataset(ds, 30, 5);
  ASSERT_EQ(again.train.size(), s.train.size());
  for (std::size_t i = 0; i < s.train.size(); ++i) EXPECT_EQ(again.train[i].path, s.train[i].path);

  const Split other = split_dataset(ds, 30, 6);
  bool differs = false;
  for (std::size_t i = 0; i < s.train.size(); ++i) differs |= other.train[i].path != s.train[i].path;
  EXPECT_TRUE(differs);
}

TEST(Split, SmallCategoryKeepsOneTestImage) {
  Dataset ds;
  ds.categories = {"a"};
  ds.images = {{"1.pgm", "2.pgm", "3.pgm"}};
  const Split s = split_dataset(ds, 30, 0);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.warnings.size(), 1u);
  EXPECT_THROW(split_dataset(ds, 0, 0), Error);
}

TEST(Experiment, RunsAndReports) {
  TempDir dir;
  write_synthetic_dataset(dir / "data", small_spec());
  const ExperimentConfig cfg = small_config(dir / "data");

  const RunReport report = run_experiment(cfg);
  ASSERT_EQ(report.runs.size(), 3u);
  double sum = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(report.runs[r].seed, 11u + r);
    EXPECT_EQ(report.runs[r].n_train, 12u);
    EXPECT_EQ(report.runs[r].n_test, 6u);
    EXPECT_EQ(report.runs[r].prototype_count, 10u);
    sum += report.runs[r].report.accuracy;
  }
  EXPECT_NEAR(report.mean_accuracy, sum / 3.0, 1e-15);
  EXPECT_EQ(report.isolation_violations, 0u);
  EXPECT_EQ(report.categories.size(), 3u);
  std::size_t total = 0;
  for (const auto& row : report.confusion)
    for (std::size_t v : row) total += v;
  EXPECT_EQ(total, 18u);
  EXPECT_GT(report.timings.s1, 0.0);

  const RunReport again = run_experiment(cfg);
  EXPECT_EQ(report_csv(again), report_csv(report));
  EXPECT_EQ(confusion_csv(again), confusion_csv(report));

  write_report(report, dir / "out");
  const std::string csv = slurp(dir / "out/report.csv");
  EXPECT_EQ(csv, report_csv(report));
  EXPECT_EQ(csv.rfind("run,seed,accuracy\n", 0), 0u);
  EXPECT_NE(csv.find("\nmean,,"), std::string::npos);
  EXPECT_EQ(slurp(dir / "out/confusion.csv").rfind("true,pred,count\n", 0), 0u);
  const auto summary = nlohmann::json::parse(slurp(dir / "out/summary.json"));
  EXPECT_EQ(summary.at("categories").size(), 3u);
  EXPECT_TRUE(summary.at("timings_s").contains("s1"));
  EXPECT_DOUBLE_EQ(summary.at("mean_accuracy").get<double>(), report.mean_accuracy);
}

TEST(Experiment, FilePrototypesReproduceInMemoryRun) {
  TempDir dir;
  write_synthetic_dataset(dir / "data", small_spec());
  ExperimentConfig cfg = small_config(dir / "data");
  cfg.runs = 1;
  cfg.classifier = ClassifierKind::svm;
  cfg.svm_epochs = 10;
  const RunReport memory = run_experiment(cfg);

  // the same prototypes the first run learned, rebuilt by hand
  const Dataset ds = ingest_dataset(cfg.dataset_root);
  const Split split = split_dataset(ds, cfg.n_train_per_class, cfg.seed);
  const GaborBank bank = make_bank(true);
  const auto c1 = samples_c1(split.train, cfg, bank, 1);
  std::vector<int> labels;
  for (const Sample& s : split.train) labels.push_back(s.label);
  const PrototypeSet protos =
      learn_prototypes(cfg, c1, labels, ds.categories.size(), mix_seed(cfg.seed, 0x70726f746fULL));
  save_prototypes(protos, dir / "p.bin");

  ExperimentConfig from_file = cfg;
  from_file.set("prototype_source", "file:" + (dir / "p.bin").string());
  const RunReport loaded = run_experiment(from_file);
  EXPECT_EQ(loaded.runs[0].report.accuracy, memory.runs[0].report.accuracy);
  EXPECT_EQ(report_csv(loaded), report_csv(memory));
}

TEST(Experiment, PamPrototypesStayOnTrainingSide) {
  TempDir dir;
  write_synthetic_dataset(dir / "data", small_spec());
  ExperimentConfig cfg = small_config(dir / "data");
  cfg.set("prototype_source", "pam");
  cfg.runs = 1;
  cfg.pam.pool_budget = 40;
  const RunReport report = run_experiment(cfg);
  EXPECT_EQ(report.isolation_violations, 0u);
  EXPECT_GT(report.runs[0].prototype_count, 0u);
}

TEST(Experiment, BadImageIsNamed) {
  TempDir dir;
  write_synthetic_dataset(dir / "data", small_spec());
  const fs::path bad = dir / "data/orient_045/img_zzz.pgm";
  std::ofstream(bad) << "P5\n10 10\n255\nshort";
  try {
    run_experiment(small_config(dir / "data"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("img_zzz.pgm"), std::string::npos) << e.what();
  }
}

TEST(Isolation, CountsSharedPaths) {
  const std::vector<Sample> learn{{"a.pgm", 0, 0}, {"b.pgm", 0, 1}};
  const std::vector<Sample> test{{"b.pgm", 0, 1}, {"c.pgm", 0, 2}};
  EXPECT_EQ(count_isolation_violations(learn, test), 1u);
  EXPECT_EQ(count_isolation_violations(learn, {}), 0u);
}

TEST(Bench, CsvAndExponent) {
  const int sizes[] = {40, 48, 56};
  BenchOptions opts;
  opts.repeats = 2;
  opts.warmup = false;
  const auto rows = benchmark_s1(sizes, opts);
  ASSERT_EQ(rows.size(), 9u);
  for (const BenchRow& r : rows) {
    EXPECT_EQ(r.samples_s.size(), 2u);
    EXPECT_GT(r.mean_s, 0.0);
    EXPECT_GE(r.std_s, 0.0);
  }
  const std::string csv = bench_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_EQ(csv.rfind("size,mode,mean_s,std_s\n", 0), 0u);
  EXPECT_NE(csv.find("56,approx2,"), std::string::npos);

  EXPECT_EQ(parse_bench_mode("approx1"), BenchMode::approx1);
  EXPECT_THROW(parse_bench_mode("fast"), Error);

  const double x[] = {1.0, 2.0, 4.0, 8.0};
  const double y[] = {3.0, 12.0, 48.0, 192.0};
  EXPECT_NEAR(fit_power_exponent(x, y), 2.0, 1e-12);
}
