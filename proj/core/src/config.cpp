#include "hmax/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "hmax/error.hpp"

namespace hmax {

EmbedRule embed_rule(EmbedPreset preset) {
  switch (preset) {
    case EmbedPreset::off: return EmbedRule::off();
    case EmbedPreset::opt1: return EmbedRule::opt1();
    case EmbedPreset::opt2: return EmbedRule::opt2();
    case EmbedPreset::opt3: return EmbedRule::opt3();
  }
  return EmbedRule::off();
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  fail(ErrorKind::config, "invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                              std::string(expected) + ")");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
  return out;
}

template <typename E>
E parse_enum(std::string_view key, std::string_view value, std::initializer_list<std::pair<std::string_view, E>> options) {
  std::string expected;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    expected += expected.empty() ? std::string(name) : "|" + std::string(name);
  }
  bad_value(key, value, expected);
}

template <typename E>
std::string_view enum_name(E value, std::initializer_list<std::pair<std::string_view, E>> options) {
  for (const auto& [name, e] : options)
    if (e == value) return name;
  return "?";
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::initializer_list<std::pair<std::string_view, ConvMode>> kConv = {{"dense", ConvMode::dense},
                                                                            {"separable", ConvMode::separable}};
const std::initializer_list<std::pair<std::string_view, SigmaMode>> kSigma = {
    {"lambda_ratio", SigmaMode::lambda_ratio}, {"literal", SigmaMode::literal}};
const std::initializer_list<std::pair<std::string_view, bool>> kPreprocess = {{"none", false}, {"combined", true}};
const std::initializer_list<std::pair<std::string_view, EmbedPreset>> kEmbed = {
    {"off", EmbedPreset::off}, {"opt1", EmbedPreset::opt1}, {"opt2", EmbedPreset::opt2}, {"opt3", EmbedPreset::opt3}};
const std::initializer_list<std::pair<std::string_view, Overlap>> kOverlap = {{"none", Overlap::none},
                                                                              {"half", Overlap::half}};
const std::initializer_list<std::pair<std::string_view, ClassifierKind>> kClassifier = {{"nn", ClassifierKind::nn},
                                                                                        {"svm", ClassifierKind::svm}};
const std::initializer_list<std::pair<std::string_view, DropRule>> kDrop = {{"weakest", DropRule::weakest},
                                                                            {"random", DropRule::random}};

struct Field {
  std::string_view name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  using SV = std::string_view;
  static const std::vector<Field> table = {
      {"dataset_root", [](C& c, SV v) { c.dataset_root = std::string(v); },
       [](const C& c) { return c.dataset_root.string(); }},
      {"n_train_per_class", [](C& c, SV v) { c.n_train_per_class = parse_number<int>("n_train_per_class", v); },
       [](const C& c) { return std::to_string(c.n_train_per_class); }},
      {"target_height", [](C& c, SV v) { c.target_height = parse_number<int>("target_height", v); },
       [](const C& c) { return std::to_string(c.target_height); }},
      {"conv_mode", [](C& c, SV v) { c.conv_mode = parse_enum("conv_mode", v, kConv); },
       [](const C& c) { return std::string(enum_name(c.conv_mode, kConv)); }},
      {"sigma_mode", [](C& c, SV v) { c.sigma_mode = parse_enum("sigma_mode", v, kSigma); },
       [](const C& c) { return std::string(enum_name(c.sigma_mode, kSigma)); }},
      {"preprocess", [](C& c, SV v) { c.preprocess_combined = parse_enum("preprocess", v, kPreprocess); },
       [](const C& c) { return std::string(enum_name(c.preprocess_combined, kPreprocess)); }},
      {"alpha", [](C& c, SV v) { c.combine.alpha = parse_number<double>("alpha", v); },
       [](const C& c) { return num(c.combine.alpha); }},
      {"c", [](C& c, SV v) { c.combine.c = parse_number<double>("c", v); },
       [](const C& c) { return num(c.combine.c); }},
      {"clahe_tile", [](C& c, SV v) { c.clahe.tile = parse_number<int>("clahe_tile", v); },
       [](const C& c) { return std::to_string(c.clahe.tile); }},
      {"clahe_clip", [](C& c, SV v) { c.clahe.clip = parse_number<double>("clahe_clip", v); },
       [](const C& c) { return num(c.clahe.clip); }},
      {"c1_embed", [](C& c, SV v) { c.c1_embed = parse_enum("c1_embed", v, kEmbed); },
       [](const C& c) { return std::string(enum_name(c.c1_embed, kEmbed)); }},
      {"c1_overlap", [](C& c, SV v) { c.c1_overlap = parse_enum("c1_overlap", v, kOverlap); },
       [](const C& c) { return std::string(enum_name(c.c1_overlap, kOverlap)); }},
      {"prototype_source",
       [](C& c, SV v) {
         if (v == "random") {
           c.prototype_source = PrototypeSourceKind::random;
         } else if (v == "pam") {
           c.prototype_source = PrototypeSourceKind::pam;
         } else if (v.starts_with("file:") && v.size() > 5) {
           c.prototype_source = PrototypeSourceKind::file;
           c.prototype_file = std::string(v.substr(5));
         } else {
           bad_value("prototype_source", v, "random|pam|file:<path>");
         }
       },
       [](const C& c) -> std::string {
         switch (c.prototype_source) {
           case PrototypeSourceKind::random: return "random";
           case PrototypeSourceKind::pam: return "pam";
           case PrototypeSourceKind::file: return "file:" + c.prototype_file.string();
         }
         return "?";
       }},
      {"count_per_size", [](C& c, SV v) { c.count_per_size = parse_number<int>("count_per_size", v); },
       [](const C& c) { return std::to_string(c.count_per_size); }},
      {"sizes", [](C& c, SV v) { c.sizes = parse_int_list(v); }, [](const C& c) { return join(c.sizes); }},
      {"bands", [](C& c, SV v) { c.bands = parse_int_list(v); }, [](const C& c) { return join(c.bands); }},
      {"pam_medoids_per_size",
       [](C& c, SV v) { c.pam.medoids_per_size = parse_number<int>("pam_medoids_per_size", v); },
       [](const C& c) { return std::to_string(c.pam.medoids_per_size); }},
      {"pam_drop_per_size", [](C& c, SV v) { c.pam.drop_per_size = parse_number<int>("pam_drop_per_size", v); },
       [](const C& c) { return std::to_string(c.pam.drop_per_size); }},
      {"pam_pool_budget", [](C& c, SV v) { c.pam.pool_budget = parse_number<std::size_t>("pam_pool_budget", v); },
       [](const C& c) { return std::to_string(c.pam.pool_budget); }},
      {"pam_max_iter", [](C& c, SV v) { c.pam.max_iter = parse_number<std::size_t>("pam_max_iter", v); },
       [](const C& c) { return std::to_string(c.pam.max_iter); }},
      {"pam_drop_rule", [](C& c, SV v) { c.pam.drop_rule = parse_enum("pam_drop_rule", v, kDrop); },
       [](const C& c) { return std::string(enum_name(c.pam.drop_rule, kDrop)); }},
      {"beta", [](C& c, SV v) { c.beta = parse_number<double>("beta", v); },
       [](const C& c) { return num(c.beta); }},
      {"classifier", [](C& c, SV v) { c.classifier = parse_enum("classifier", v, kClassifier); },
       [](const C& c) { return std::string(enum_name(c.classifier, kClassifier)); }},
      {"svm_c", [](C& c, SV v) { c.svm_c = parse_number<double>("svm_c", v); },
       [](const C& c) { return num(c.svm_c); }},
      {"svm_epochs", [](C& c, SV v) { c.svm_epochs = parse_number<int>("svm_epochs", v); },
       [](const C& c) { return std::to_string(c.svm_epochs); }},
      {"runs", [](C& c, SV v) { c.runs = parse_number<int>("runs", v); },
       [](const C& c) { return std::to_string(c.runs); }},
      {"seed", [](C& c, SV v) { c.seed = parse_number<std::uint64_t>("seed", v); },
       [](const C& c) { return std::to_string(c.seed); }},
      {"jobs", [](C& c, SV v) { c.jobs = parse_number<int>("jobs", v); },
       [](const C& c) { return std::to_string(c.jobs); }},
      {"output_dir", [](C& c, SV v) { c.output_dir = std::string(v); },
       [](const C& c) { return c.output_dir.string(); }},
  };
  return table;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  text = trim(text);
  if (text.starts_with('[') && text.ends_with(']')) text = trim(text.substr(1, text.size() - 2));
  std::vector<int> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    out.push_back(parse_number<int>("list", item));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  require(!out.empty(), ErrorKind::config, "empty list");
  return out;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const Field& f : fields()) v.emplace_back(f.name);
    return v;
  }();
  return names;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (f.name == key) {
      f.set(*this, trim(value));
      return;
    }
  }
  fail(ErrorKind::config, "unknown configuration key '" + std::string(key) + "'");
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorKind::config, what); };
  check(n_train_per_class >= 1, "n_train_per_class must be >= 1");
  check(target_height >= filter_size(kScales), "target_height must be >= 37 (largest Gabor filter)");
  check(runs >= 1, "runs must be >= 1");
  check(count_per_size >= 1, "count_per_size must be >= 1");
  check(beta > 0.0, "beta must be positive");
  check(svm_c > 0.0, "svm_c must be positive");
  check(svm_epochs >= 1, "svm_epochs must be >= 1");
  check(jobs >= 0, "jobs must be >= 0");
  check(prototype_source != PrototypeSourceKind::file || !prototype_file.empty(), "prototype file path is empty");
  try {
    combine.validate();
    clahe.validate();
    pam_config().validate();
    embed_rule(c1_embed).validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
}

FeatureConfig ExperimentConfig::feature_config() const {
  FeatureConfig f;
  if (preprocess_combined) f.combine = combine;
  f.clahe = clahe;
  f.conv = conv_mode;
  f.c1.overlap = c1_overlap;
  f.embed = embed_rule(c1_embed);
  f.beta = beta;
  return f;
}

PamConfig ExperimentConfig::pam_config() const {
  PamConfig p = pam;
  p.sizes = sizes;
  p.bands = bands;
  return p;
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.name) + " = " + f.get(*this) + "\n";
  return out;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorKind::config,
            "line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    try {
      base.set(key, value);
    } catch (const Error& e) {
      fail(ErrorKind::config, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str(), std::move(base));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HMAX_JOBS")) {
    int v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace hmax
