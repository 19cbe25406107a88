#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace hmax {

enum class PrototypeOrigin : std::uint8_t { random = 0, pam = 1 };

std::string_view origin_name(PrototypeOrigin origin);

/// Allowed prototype side lengths.
inline constexpr int kPrototypeSizes[] = {4, 8, 12, 16};

/// An n x n x 4 patch of C1 values. Layout is row-major with orientation as the
/// fastest index: tensor[((i * n) + j) * 4 + o].
struct Prototype {
  int size = 0;
  std::vector<float> tensor;
  int band = 0;  ///< 1-based source band
  int row = 0;   ///< source position in that band's C1 grid (not persisted)
  int col = 0;
  PrototypeOrigin origin = PrototypeOrigin::random;

  float at(int i, int j, int o) const { return tensor[static_cast<std::size_t>((i * size + j) * 4 + o)]; }
  bool all_zero() const;

  bool operator==(const Prototype&) const = default;
};

struct PrototypeSet {
  std::vector<Prototype> prototypes;
  PrototypeOrigin origin = PrototypeOrigin::random;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return prototypes.size(); }
  std::size_t count_of_size(int n) const;
};

/// Validates a prototype: allowed size class, tensor length n*n*4, finite, not all-zero.
void validate_prototype(const Prototype& p);

// Binary format, little-endian:
//   "HMXP" | u32 version | u32 count
//   per prototype: u8 size | u8 origin | u8 band | u8 reserved | n*n*4 x f32
inline constexpr std::uint32_t kPrototypeFormatVersion = 1;

std::vector<std::uint8_t> encode_prototypes(const PrototypeSet& set);
PrototypeSet decode_prototypes(std::span<const std::uint8_t> bytes);

void save_prototypes(const PrototypeSet& set, const std::filesystem::path& path);
PrototypeSet load_prototypes(const std::filesystem::path& path);

/// One block per prototype: a header line, then n lines of n*4 decimal floats.
void dump_prototypes_text(const PrototypeSet& set, std::ostream& out);

}  // namespace hmax
