#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hmax/bench.hpp"
#include "hmax/config.hpp"
#include "hmax/error.hpp"
#include "hmax/experiment.hpp"
#include "hmax/prototype.hpp"
#include "hmax/synthetic.hpp"

namespace hmax::cli {
namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Extra spellings for the most used keys.
const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a{
      {"dataset_root", "--dataset"}, {"prototype_source", "--protos"}, {"output_dir", "--output,-o"}};
  return a;
}

/// Every ExperimentConfig key as a string flag, plus --config. The file is
/// applied first and explicit flags on top.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App* app, const std::set<std::string>& skip = {}) {
    app->add_option("--config", config_path, "key = value config file");
    for (const std::string& key : ExperimentConfig::keys()) {
      if (skip.count(key)) continue;
      std::string names = "--" + dashed(key);
      if (auto it = aliases().find(key); it != aliases().end()) names += "," + it->second;
      options.emplace_back(key, app->add_option(names, values[key], "config key " + key));
    }
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg.set(key, values.at(key));
    return cfg;
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path);
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path);
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file(path, text);
}

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// --- subcommands ------------------------------------------------------------

void cmd_extract(const ExperimentConfig& cfg, const std::string& image, const std::string& out_path,
                 std::ostream& out) {
  require(cfg.prototype_source == PrototypeSourceKind::file, ErrorKind::config,
          "extract needs a prototype file (--protos file:<path>)");
  cfg.validate();
  const PrototypeSet protos = load_prototypes(cfg.prototype_file);
  const GaborBank bank = make_bank(cfg.conv_mode == ConvMode::separable, cfg.gabor_options());
  const GrayImage img = load_input(image, cfg.target_height);
  const C2Vector c2 = c2_from_c1(image_c1(img, bank, cfg.feature_config()), protos, cfg.beta);
  std::string csv = "prototype,size,c2\n";
  for (std::size_t k = 0; k < c2.size(); ++k)
    csv += std::to_string(k) + "," + std::to_string(protos.prototypes[k].size) + "," + fmt(c2[k], "%.17g") + "\n";
  emit(out_path, csv, out);
}

void cmd_learn(ExperimentConfig cfg, const std::string& source, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  if (!source.empty()) cfg.set("prototype_source", source);
  require(cfg.prototype_source != PrototypeSourceKind::file, ErrorKind::config,
          "learn-protos needs --source random or pam");
  cfg.validate();
  const Dataset ds = ingest_dataset(cfg.dataset_root);
  const Split split = split_dataset(ds, cfg.n_train_per_class, cfg.seed);
  for (const auto& w : ds.warnings) err << "warning: " << w << "\n";
  for (const auto& w : split.warnings) err << "warning: " << w << "\n";

  const GaborBank bank = make_bank(cfg.conv_mode == ConvMode::separable, cfg.gabor_options());
  const auto c1 = samples_c1(split.train, cfg, bank, resolve_jobs(cfg.jobs));
  std::vector<int> labels;
  for (const Sample& s : split.train) labels.push_back(s.label);
  PrototypeSet protos = learn_prototypes(cfg, c1, labels, ds.categories.size(), cfg.seed);
  save_prototypes(protos, out_path);
  out << "wrote " << protos.size() << " " << origin_name(protos.origin) << " prototypes from " << split.train.size()
      << " training images to " << out_path << "\n";
}

void cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const RunReport report = run_experiment(cfg);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  const std::filesystem::path dir = cfg.output_dir.empty() ? std::filesystem::path("results") : cfg.output_dir;
  write_report(report, dir);
  for (const auto& r : report.runs)
    out << "run " << r.run << " seed " << r.seed << " accuracy " << fmt(r.report.accuracy, "%.4f") << "\n";
  out << "mean accuracy " << fmt(report.mean_accuracy, "%.4f") << "\n";
  out << "report written to " << dir.string() << "\n";
}

void cmd_bench(const std::string& sizes_text, const std::string& modes_text, int repeats, std::uint64_t seed,
               const std::string& out_path, std::ostream& out) {
  const std::vector<int> sizes = parse_int_list(sizes_text);
  require(!sizes.empty(), ErrorKind::invalid_argument, "no bench sizes");
  BenchOptions opts;
  opts.repeats = repeats;
  opts.seed = seed;
  if (!modes_text.empty()) {
    opts.modes.clear();
    std::stringstream ss(modes_text);
    for (std::string m; std::getline(ss, m, ',');) opts.modes.push_back(parse_bench_mode(m));
  }
  emit(out_path, bench_csv(benchmark_s1(sizes, opts)), out);
}

void cmd_inspect(const std::string& path, bool dump, std::ostream& out) {
  const PrototypeSet set = load_prototypes(path);
  out << "file " << path << "\n";
  out << "count " << set.size() << "\n";
  out << "origin " << origin_name(set.origin) << "\n";
  for (int n : kPrototypeSizes) {
    std::map<int, std::size_t> per_band;
    for (const Prototype& p : set.prototypes)
      if (p.size == n) ++per_band[p.band];
    out << "size " << n << " count " << set.count_of_size(n);
    if (!per_band.empty()) {
      out << " bands";
      for (const auto& [band, c] : per_band) out << " " << band << ":" << c;
    }
    out << "\n";
  }
  std::size_t zero = 0;
  for (const Prototype& p : set.prototypes) zero += p.all_zero() ? 1 : 0;
  out << "all_zero " << zero << "\n";
  if (dump) dump_prototypes_text(set, out);
}

void cmd_synth(const std::string& dir, const SyntheticSpec& spec, std::ostream& out) {
  const auto names = write_synthetic_dataset(dir, spec);
  out << "wrote " << names.size() * static_cast<std::size_t>(spec.per_class) << " images in " << names.size()
      << " categories to " << dir << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HMAX object recognition pipeline", "hmax"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hmax 0.1.0");

  // extract
  auto* extract = app.add_subcommand("extract", "C2 feature vector of one image as CSV");
  ConfigFlags extract_flags;
  std::string extract_image, extract_out;
  extract->add_option("image", extract_image, "input image")->required();
  extract->add_option("--out", extract_out, "CSV path (default: stdout)");
  extract_flags.attach(extract, {"output_dir"});

  // learn-protos
  auto* learn = app.add_subcommand("learn-protos", "learn prototypes from the training split of a dataset");
  ConfigFlags learn_flags;
  std::string learn_source, learn_out = "protos.bin";
  learn->add_option("--source", learn_source, "random or pam");
  learn->add_option("--out", learn_out, "output prototype file")->capture_default_str();
  learn_flags.attach(learn, {"output_dir"});

  // run
  auto* runc = app.add_subcommand("run", "full train/test protocol; writes report.csv, confusion.csv, summary.json");
  ConfigFlags run_flags;
  run_flags.attach(runc);

  // bench
  auto* bench = app.add_subcommand("bench", "S1 timing comparison: baseline, approx1, approx2");
  std::string bench_sizes = "100,160,256", bench_modes, bench_out;
  int bench_repeats = 5;
  std::uint64_t bench_seed = 0;
  bench->add_option("--sizes", bench_sizes, "square image sizes")->capture_default_str();
  bench->add_option("--modes", bench_modes, "subset of baseline,approx1,approx2");
  bench->add_option("--repeats", bench_repeats, "timed repeats per size and mode")->capture_default_str();
  bench->add_option("--seed", bench_seed, "synthetic image seed")->capture_default_str();
  bench->add_option("--out", bench_out, "CSV path (default: stdout)");

  // inspect-protos
  auto* inspect = app.add_subcommand("inspect-protos", "summarize a prototype file");
  std::string inspect_path;
  bool inspect_dump = false;
  inspect->add_option("file", inspect_path, "prototype file")->required();
  inspect->add_flag("--dump", inspect_dump, "print every tensor");

  // synth
  auto* synth = app.add_subcommand("synth", "write the synthetic oriented-texture dataset");
  std::string synth_dir;
  SyntheticSpec synth_spec;
  synth->add_option("dir", synth_dir, "output directory")->required();
  synth->add_option("--per-class", synth_spec.per_class)->capture_default_str();
  synth->add_option("--min-size", synth_spec.min_size)->capture_default_str();
  synth->add_option("--max-size", synth_spec.max_size)->capture_default_str();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--orientations", synth_spec.orientations_deg, "degrees")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage_error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (extract->parsed()) {
      cmd_extract(extract_flags.resolve(), extract_image, extract_out, out);
    } else if (learn->parsed()) {
      cmd_learn(learn_flags.resolve(), learn_source, learn_out, out, err);
    } else if (runc->parsed()) {
      cmd_run(run_flags.resolve(), out, err);
    } else if (bench->parsed()) {
      cmd_bench(bench_sizes, bench_modes, bench_repeats, bench_seed, bench_out, out);
    } else if (inspect->parsed()) {
      cmd_inspect(inspect_path, inspect_dump, out);
    } else if (synth->parsed()) {
      cmd_synth(synth_dir, synth_spec, out);
    }
  } catch (const Error& e) {
    err << "error: " << kind_name(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io_error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal_error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hmax::cli
