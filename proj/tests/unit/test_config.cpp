#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#include "hmax/config.hpp"
#include "hmax/error.hpp"

using namespace hmax;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "nothing thrown";
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c;
  EXPECT_EQ(c.n_train_per_class, 30);
  EXPECT_EQ(c.target_height, 140);
  EXPECT_EQ(c.runs, 3);
  EXPECT_EQ(c.count_per_size, 500);
  EXPECT_EQ(c.sizes, (std::vector<int>{4, 8, 12, 16}));
  EXPECT_EQ(c.beta, 1.0);
  EXPECT_EQ(c.classifier, ClassifierKind::svm);
  EXPECT_EQ(c.conv_mode, ConvMode::dense);
  EXPECT_FALSE(c.preprocess_combined);
  EXPECT_EQ(c.combine.alpha, 0.75);
  EXPECT_EQ(c.combine.c, 0.25);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesFlatKeyValueText) {
  const ExperimentConfig c = parse_config(R"(
# experiment
dataset_root = "/data/caltech 101"
n_train_per_class = 15   # per class
conv_mode = separable
preprocess = combined
alpha = 0.5
c1_embed = opt3
c1_overlap = none
prototype_source = file:/tmp/p.bin
sizes = [4, 8]
bands = 1,2
classifier = nn
seed = 7
)");
  EXPECT_EQ(c.dataset_root, "/data/caltech 101");
  EXPECT_EQ(c.n_train_per_class, 15);
  EXPECT_EQ(c.conv_mode, ConvMode::separable);
  EXPECT_TRUE(c.preprocess_combined);
  EXPECT_EQ(c.combine.alpha, 0.5);
  EXPECT_EQ(c.c1_embed, EmbedPreset::opt3);
  EXPECT_EQ(c.c1_overlap, Overlap::none);
  EXPECT_EQ(c.prototype_source, PrototypeSourceKind::file);
  EXPECT_EQ(c.prototype_file, "/tmp/p.bin");
  EXPECT_EQ(c.sizes, (std::vector<int>{4, 8}));
  EXPECT_EQ(c.bands, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.classifier, ClassifierKind::nn);
  EXPECT_EQ(c.seed, 7u);

  const FeatureConfig f = c.feature_config();
  ASSERT_TRUE(f.combine.has_value());
  EXPECT_EQ(f.combine->alpha, 0.5);
  EXPECT_EQ(f.conv, ConvMode::separable);
  EXPECT_EQ(f.c1.overlap, Overlap::none);
  EXPECT_EQ(f.embed.mode, EmbedMode::banded);
  EXPECT_EQ(c.pam_config().bands, c.bands);
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig c;
  c.set("beta", "0.125");
  c.set("svm_c", "3.5");
  c.set("prototype_source", "pam");
  c.set("pam_drop_rule", "random");
  c.set("output_dir", "out dir");
  const ExperimentConfig back = parse_config(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.beta, 0.125);
  EXPECT_EQ(back.pam.drop_rule, DropRule::random);
  for (const std::string& key : ExperimentConfig::keys())
    EXPECT_NE(c.to_text().find(key + " = "), std::string::npos) << key;
}

TEST(Config, Errors) {
  EXPECT_EQ(kind_of([] { parse_config("nonsense_key = 3"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("runs = three"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("runs"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("conv_mode = fft"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("prototype_source = file:"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { load_config("/nonexistent/x.toml"); }), ErrorKind::io);

  auto invalid = [](const char* key, const char* value) {
    ExperimentConfig c;
    c.set(key, value);
    return kind_of([&] { c.validate(); });
  };
  EXPECT_EQ(invalid("runs", "0"), ErrorKind::config);
  EXPECT_EQ(invalid("n_train_per_class", "0"), ErrorKind::config);
  EXPECT_EQ(invalid("target_height", "20"), ErrorKind::config);
  EXPECT_EQ(invalid("alpha", "3"), ErrorKind::config);
  EXPECT_EQ(invalid("c", "-0.1"), ErrorKind::config);
  EXPECT_EQ(invalid("beta", "0"), ErrorKind::config);
  EXPECT_EQ(invalid("sizes", "4,5"), ErrorKind::config);
  EXPECT_EQ(invalid("bands", "0,9"), ErrorKind::config);
  EXPECT_EQ(invalid("clahe_tile", "1"), ErrorKind::config);
}

TEST(Config, IntList) {
  EXPECT_EQ(parse_int_list("[100, 160,256]"), (std::vector<int>{100, 160, 256}));
  EXPECT_EQ(parse_int_list("7"), (std::vector<int>{7}));
  EXPECT_THROW(parse_int_list(""), Error);
  EXPECT_THROW(parse_int_list("1,,2"), Error);
}

TEST(Config, JobsResolution) {
  EXPECT_EQ(resolve_jobs(3), 3);
  ::setenv("HMAX_JOBS", "5", 1);
  EXPECT_EQ(resolve_jobs(0), 5);
  ::setenv("HMAX_JOBS", "junk", 1);
  EXPECT_EQ(resolve_jobs(0), static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  ::unsetenv("HMAX_JOBS");
  EXPECT_GE(resolve_jobs(0), 1);
}
