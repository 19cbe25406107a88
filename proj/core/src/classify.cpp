#include "hmax/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hmax/binary_io.hpp"
#include "hmax/error.hpp"
#include "hmax/random.hpp"

namespace hmax {

void LabeledFeatures::validate() const {
  require(vectors.size() == labels.size(), ErrorKind::invalid_argument, "vector and label counts differ");
  for (const C2Vector& v : vectors) {
    require(v.size() == dim(), ErrorKind::invalid_argument, "feature vectors must share one length");
    for (double x : v) require(std::isfinite(x), ErrorKind::numerical, "feature vector contains a non-finite value");
  }
}

namespace {

void check_length(std::size_t expected, std::size_t got) {
  require(expected == got, ErrorKind::invalid_argument,
          "feature length " + std::to_string(got) + " does not match model length " + std::to_string(expected));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

// --- nearest neighbour ---------------------------------------------------------

NNModel train_nn(const LabeledFeatures& data) {
  data.validate();
  require(data.size() >= 1, ErrorKind::invalid_argument, "nearest-neighbour training needs at least one exemplar");
  return NNModel{data.vectors, data.labels};
}

int predict_nn(const NNModel& model, std::span<const double> v) {
  require(!model.exemplars.empty(), ErrorKind::invalid_argument, "empty nearest-neighbour model");
  check_length(model.exemplars.front().size(), v.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < model.exemplars.size(); ++e) {
    const C2Vector& x = model.exemplars[e];
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += (x[i] - v[i]) * (x[i] - v[i]);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return model.labels[best];
}

// --- linear SVM ----------------------------------------------------------------

namespace {

struct Standardized {
  std::vector<std::vector<double>> rows;  // standardized, with a trailing 1 for the bias
};

double objective(const std::vector<double>& w, const Standardized& x, const std::vector<double>& y, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows.size(); ++i) loss += std::max(0.0, 1.0 - y[i] * dot(w, x.rows[i]));
  return 0.5 * lambda * dot(w, w) + loss / static_cast<double>(x.rows.size());
}

}  // namespace

SVMModel train_linear_svm(const LabeledFeatures& data, const SvmHyper& hyper, std::vector<double>* objective_trace) {
  data.validate();
  require(hyper.C > 0.0 && std::isfinite(hyper.C), ErrorKind::invalid_argument, "SVM C must be positive");
  require(hyper.epochs >= 1, ErrorKind::invalid_argument, "SVM epochs must be positive");
  std::vector<int> classes = data.labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  require(classes.size() >= 2, ErrorKind::invalid_argument, "SVM training needs at least two classes");

  const std::size_t n = data.size();
  const std::size_t dim = data.dim();

  SVMModel model;
  model.classes = classes;
  model.C = hyper.C;
  model.mean.assign(dim, 0.0);
  model.scale.assign(dim, 1.0);
  for (const C2Vector& v : data.vectors)
    for (std::size_t d = 0; d < dim; ++d) model.mean[d] += v[d];
  for (double& m : model.mean) m /= static_cast<double>(n);
  for (std::size_t d = 0; d < dim; ++d) {
    double var = 0.0;
    for (const C2Vector& v : data.vectors) var += (v[d] - model.mean[d]) * (v[d] - model.mean[d]);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.scale[d] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }

  Standardized x;
  x.rows.reserve(n);
  for (const C2Vector& v : data.vectors) {
    std::vector<double> row(dim + 1, 1.0);
    for (std::size_t d = 0; d < dim; ++d) row[d] = (v[d] - model.mean[d]) * model.scale[d];
    x.rows.push_back(std::move(row));
  }

  const double lambda = 1.0 / (hyper.C * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<double> trace(static_cast<std::size_t>(hyper.epochs), 0.0);

  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] == classes[ci] ? 1.0 : -1.0;

    Rng rng(mix_seed(hyper.seed, ci));
    std::vector<double> w(dim + 1, 0.0);
    std::vector<double> avg(dim + 1, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t t = 0;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
      shuffle(order, rng);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double margin = y[i] * dot(w, x.rows[i]);
        const double shrink = 1.0 - eta * lambda;
        for (double& wd : w) wd *= shrink;
        if (margin < 1.0) {
          for (std::size_t d = 0; d <= dim; ++d) w[d] += eta * y[i] * x.rows[i][d];
        }
        const double norm = std::sqrt(dot(w, w));
        if (norm > radius) {
          for (double& wd : w) wd *= radius / norm;
        }
        const double step = 1.0 / static_cast<double>(t);
        for (std::size_t d = 0; d <= dim; ++d) avg[d] += (w[d] - avg[d]) * step;
      }
      if (objective_trace) trace[static_cast<std::size_t>(epoch)] += objective(avg, x, y, lambda);
    }
    model.weights.emplace_back(avg.begin(), avg.begin() + static_cast<std::ptrdiff_t>(dim));
    model.bias.push_back(avg[dim]);
  }

  if (objective_trace) {
    for (double& v : trace) v /= static_cast<double>(classes.size());
    *objective_trace = std::move(trace);
  }
  return model;
}

std::vector<double> svm_scores(const SVMModel& model, std::span<const double> v) {
  check_length(model.mean.size(), v.size());
  std::vector<double> xs(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) xs[d] = (v[d] - model.mean[d]) * model.scale[d];
  std::vector<double> scores(model.classes.size());
  for (std::size_t c = 0; c < model.classes.size(); ++c) scores[c] = dot(model.weights[c], xs) + model.bias[c];
  return scores;
}

int predict_svm(const SVMModel& model, std::span<const double> v) {
  require(!model.classes.empty(), ErrorKind::invalid_argument, "empty SVM model");
  const std::vector<double> scores = svm_scores(model, v);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return model.classes[best];
}

int predict(const Classifier& model, std::span<const double> v) {
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, NNModel>) {
          return predict_nn(m, v);
        } else {
          return predict_svm(m, v);
        }
      },
      model);
}

// --- evaluation ----------------------------------------------------------------

AccuracyReport evaluate(const Predictor& predictor, const LabeledFeatures& test) {
  test.validate();
  require(test.size() >= 1, ErrorKind::invalid_argument, "evaluation needs a non-empty test set");

  std::vector<int> predictions;
  predictions.reserve(test.size());
  for (const C2Vector& v : test.vectors) predictions.push_back(predictor(v));

  AccuracyReport report;
  report.classes = test.labels;
  report.classes.insert(report.classes.end(), predictions.begin(), predictions.end());
  std::sort(report.classes.begin(), report.classes.end());
  report.classes.erase(std::unique(report.classes.begin(), report.classes.end()), report.classes.end());
  const std::size_t k = report.classes.size();
  auto slot = [&](int label) {
    return static_cast<std::size_t>(std::lower_bound(report.classes.begin(), report.classes.end(), label) -
                                    report.classes.begin());
  };

  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < test.size(); ++i) {
    ++report.confusion[slot(test.labels[i])][slot(predictions[i])];
    if (test.labels[i] == predictions[i]) ++report.correct;
  }
  report.total = test.size();
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  report.per_class_accuracy.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t row_total = std::accumulate(report.confusion[c].begin(), report.confusion[c].end(), std::size_t{0});
    report.per_class_accuracy[c] = row_total == 0 ? std::numeric_limits<double>::quiet_NaN()
                                                  : static_cast<double>(report.confusion[c][c]) / row_total;
  }
  return report;
}

AccuracyReport evaluate(const Classifier& model, const LabeledFeatures& test) {
  return evaluate([&model](std::span<const double> v) { return predict(model, v); }, test);
}

// --- serialization -------------------------------------------------------------

std::vector<std::uint8_t> encode_model(const Classifier& model) {
  ByteWriter w;
  w.magic("HMXM");
  w.u32(kModelFormatVersion);
  if (const auto* nn = std::get_if<NNModel>(&model)) {
    const std::size_t dim = nn->exemplars.empty() ? 0 : nn->exemplars.front().size();
    w.u32(0);
    w.u32(static_cast<std::uint32_t>(dim));
    w.u32(static_cast<std::uint32_t>(nn->exemplars.size()));
    for (std::size_t e = 0; e < nn->exemplars.size(); ++e) {
      require(nn->exemplars[e].size() == dim, ErrorKind::invalid_argument, "ragged nearest-neighbour model");
      w.u32(static_cast<std::uint32_t>(nn->labels[e]));
      for (double v : nn->exemplars[e]) w.f64(v);
    }
  } else {
    const SVMModel& svm = std::get<SVMModel>(model);
    const std::size_t dim = svm.mean.size();
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(dim));
    w.u32(static_cast<std::uint32_t>(svm.classes.size()));
    w.f64(svm.C);
    for (double v : svm.mean) w.f64(v);
    for (double v : svm.scale) w.f64(v);
    for (std::size_t c = 0; c < svm.classes.size(); ++c) {
      w.u32(static_cast<std::uint32_t>(svm.classes[c]));
      w.f64(svm.bias[c]);
      for (double v : svm.weights[c]) w.f64(v);
    }
  }
  return w.take();
}

Classifier decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model file");
  r.expect_magic("HMXM");
  const std::uint32_t version = r.u32();
  require(version == kModelFormatVersion, ErrorKind::format, "unsupported model format version " + std::to_string(version));
  const std::uint32_t kind = r.u32();
  const std::uint32_t dim = r.u32();
  const std::uint32_t count = r.u32();
  auto read_vec = [&](std::size_t len) {
    std::vector<double> v(len);
    for (double& x : v) x = r.f64();
    return v;
  };

  if (kind == 0) {
    NNModel nn;
    for (std::uint32_t e = 0; e < count; ++e) {
      nn.labels.push_back(static_cast<int>(r.u32()));
      nn.exemplars.push_back(read_vec(dim));
    }
    r.expect_end();
    return nn;
  }
  require(kind == 1, ErrorKind::format, "unknown model kind " + std::to_string(kind));
  SVMModel svm;
  svm.C = r.f64();
  svm.mean = read_vec(dim);
  svm.scale = read_vec(dim);
  for (std::uint32_t c = 0; c < count; ++c) {
    svm.classes.push_back(static_cast<int>(r.u32()));
    svm.bias.push_back(r.f64());
    svm.weights.push_back(read_vec(dim));
  }
  r.expect_end();
  return svm;
}

void save_model(const Classifier& model, const std::filesystem::path& path) { write_bytes(path, encode_model(model)); }

Classifier load_model(const std::filesystem::path& path) { return decode_model(read_bytes(path)); }

}  // namespace hmax
