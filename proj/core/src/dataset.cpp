#include "hmax/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "hmax/error.hpp"
#include "hmax/random.hpp"

namespace hmax {

std::size_t Dataset::image_count() const {
  std::size_t n = 0;
  for (const auto& v : images) n += v.size();
  return n;
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".jpg" || ext == ".jpeg";
}

Dataset ingest_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  require(fs::is_directory(root), ErrorKind::io, "dataset root " + root.string() + " is not a directory");

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  Dataset ds;
  ds.root = root;
  std::vector<std::string> rejected;
  for (const fs::path& dir : dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.size() < 2) {
      rejected.push_back(dir.filename().string());
      continue;
    }
    ds.categories.push_back(dir.filename().string());
    ds.images.push_back(std::move(files));
  }
  if (!rejected.empty()) {
    std::string list;
    for (const auto& r : rejected) list += (list.empty() ? "" : ", ") + r;
    ds.warnings.push_back("categories with fewer than 2 images ignored: " + list);
  }
  require(!ds.categories.empty(), ErrorKind::data, "dataset " + root.string() + " has no usable categories");
  return ds;
}

Split split_dataset(const Dataset& ds, int n_train, std::uint64_t seed) {
  require(n_train >= 1, ErrorKind::invalid_argument, "n_train must be >= 1");
  Split split;
  for (std::size_t cat = 0; cat < ds.categories.size(); ++cat) {
    const auto& files = ds.images[cat];
    require(files.size() >= 2, ErrorKind::data, "category " + ds.categories[cat] + " has a single image");
    std::size_t take = static_cast<std::size_t>(n_train);
    if (files.size() <= take) {
      take = files.size() - 1;
      split.warnings.push_back("category " + ds.categories[cat] + " has " + std::to_string(files.size()) +
                               " images; using " + std::to_string(take) + " for training");
    }
    std::vector<std::size_t> order(files.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, cat));
    shuffle(order, rng);
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(take), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) {
      Sample s{files[order[i]], static_cast<int>(cat), order[i]};
      (i < take ? split.train : split.test).push_back(std::move(s));
    }
  }
  return split;
}

}  // namespace hmax
