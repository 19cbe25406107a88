#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hmax/image.hpp"
#include "hmax/random.hpp"

namespace hmax {

/// Procedural grating texture whose dominant orientation is `orientation_deg`
/// (the direction of intensity variation). Two to three gratings within
/// +/-10 degrees, random phase and wavelength, plus mild noise; values in [0,1].
GrayImage oriented_texture(int height, int width, double orientation_deg, Rng& rng);

/// Mixed-orientation texture used as the timing workload.
GrayImage bench_image(int size, std::uint64_t seed);

struct SyntheticSpec {
  std::vector<double> orientations_deg{0.0, 45.0, 90.0};
  int per_class = 20;
  int min_size = 64;
  int max_size = 160;
  std::uint64_t seed = 0;
};

struct SyntheticImage {
  int label = 0;
  GrayImage image;
};

std::vector<SyntheticImage> synthetic_images(const SyntheticSpec& spec);

/// Writes `root/orient_XXX/img_NNN.pgm` and returns the category directory names.
std::vector<std::string> write_synthetic_dataset(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace hmax
