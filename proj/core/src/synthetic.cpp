#include "hmax/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "hmax/error.hpp"
#include "hmax/imgproc.hpp"

namespace hmax {

GrayImage oriented_texture(int height, int width, double orientation_deg, Rng& rng) {
  require(height >= 1 && width >= 1, ErrorKind::invalid_argument, "texture dimensions must be positive");
  struct Grating {
    double kx, ky, phase, amplitude;
  };
  const int count = 2 + static_cast<int>(uniform_index(rng, 2));
  std::vector<Grating> gratings;
  for (int g = 0; g < count; ++g) {
    const double theta = (orientation_deg + (uniform_unit(rng) * 20.0 - 10.0)) * std::numbers::pi / 180.0;
    const double wavelength = 6.0 + uniform_unit(rng) * 8.0;
    const double k = 2.0 * std::numbers::pi / wavelength;
    gratings.push_back({k * std::cos(theta), k * std::sin(theta), uniform_unit(rng) * 2.0 * std::numbers::pi,
                        0.5 + 0.5 * uniform_unit(rng)});
  }
  double total_amp = 0.0;
  for (const auto& g : gratings) total_amp += g.amplitude;

  Matrix m(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double v = 0.0;
      for (const auto& g : gratings) v += g.amplitude * std::cos(g.kx * c + g.ky * r + g.phase);
      const double noise = (uniform_unit(rng) - 0.5) * 0.1;
      m(r, c) = std::clamp(0.5 + 0.4 * v / total_amp + noise, 0.0, 1.0);
    }
  }
  return GrayImage(std::move(m));
}

GrayImage bench_image(int size, std::uint64_t seed) {
  Rng rng(seed);
  const GrayImage a = oriented_texture(size, size, 0.0, rng);
  const GrayImage b = oriented_texture(size, size, 60.0, rng);
  const GrayImage c = oriented_texture(size, size, 120.0, rng);
  Matrix m(size, size);
  for (int r = 0; r < size; ++r)
    for (int col = 0; col < size; ++col) m(r, col) = (a(r, col) + b(r, col) + c(r, col)) / 3.0;
  return GrayImage(std::move(m));
}

std::vector<SyntheticImage> synthetic_images(const SyntheticSpec& spec) {
  require(spec.per_class >= 1, ErrorKind::invalid_argument, "per_class must be >= 1");
  require(spec.min_size >= 1 && spec.min_size <= spec.max_size, ErrorKind::invalid_argument, "bad size range");
  Rng rng(spec.seed);
  std::vector<SyntheticImage> out;
  for (std::size_t cls = 0; cls < spec.orientations_deg.size(); ++cls) {
    for (int i = 0; i < spec.per_class; ++i) {
      const auto span = static_cast<std::uint64_t>(spec.max_size - spec.min_size + 1);
      const int h = spec.min_size + static_cast<int>(uniform_index(rng, span));
      const int w = spec.min_size + static_cast<int>(uniform_index(rng, span));
      out.push_back({static_cast<int>(cls), oriented_texture(h, w, spec.orientations_deg[cls], rng)});
    }
  }
  return out;
}

std::vector<std::string> write_synthetic_dataset(const std::filesystem::path& root, const SyntheticSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  std::vector<std::string> names;
  for (double deg : spec.orientations_deg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "orient_%03d", static_cast<int>(std::lround(deg)));
    names.emplace_back(buf);
    fs::create_directories(root / names.back());
  }
  std::vector<int> counter(names.size(), 0);
  for (const SyntheticImage& s : synthetic_images(spec)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img_%03d.pgm", counter[static_cast<std::size_t>(s.label)]++);
    save_pgm(s.image, root / names[static_cast<std::size_t>(s.label)] / buf);
  }
  return names;
}

}  // namespace hmax
