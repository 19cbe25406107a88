#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hmax {

/// Category-per-directory image collection. Class id = index in `categories`.
struct Dataset {
  std::filesystem::path root;
  std::vector<std::string> categories;                    ///< sorted
  std::vector<std::vector<std::filesystem::path>> images;  ///< per category, sorted
  std::vector<std::string> warnings;

  std::size_t image_count() const;
};

/// True for the extensions the loader understands (.png, .pgm, .jpg, .jpeg).
bool is_image_file(const std::filesystem::path& path);

/// Immediate subdirectories of `root` become categories; categories with fewer
/// than two images are dropped with a warning.
Dataset ingest_dataset(const std::filesystem::path& root);

struct Sample {
  std::filesystem::path path;
  int label = 0;
  std::size_t category_index = 0;  ///< position within the category's image list
};

struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::vector<std::string> warnings;
};

/// Seeded per-category sample of `n_train` training images; the rest are test
/// images. A category with at most `n_train` images keeps one test image.
Split split_dataset(const Dataset& ds, int n_train, std::uint64_t seed);

}  // namespace hmax
