#include "hmax/prototype.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "hmax/binary_io.hpp"
#include "hmax/error.hpp"

namespace hmax {

std::string_view origin_name(PrototypeOrigin origin) {
  switch (origin) {
    case PrototypeOrigin::random: return "random";
    case PrototypeOrigin::pam: return "pam";
  }
  return "unknown";
}

bool Prototype::all_zero() const {
  return std::all_of(tensor.begin(), tensor.end(), [](float v) { return v == 0.0f; });
}

std::size_t PrototypeSet::count_of_size(int n) const {
  return static_cast<std::size_t>(
      std::count_if(prototypes.begin(), prototypes.end(), [n](const Prototype& p) { return p.size == n; }));
}

void validate_prototype(const Prototype& p) {
  require(std::find(std::begin(kPrototypeSizes), std::end(kPrototypeSizes), p.size) != std::end(kPrototypeSizes),
          ErrorKind::data, "prototype size must be 4, 8, 12 or 16; got " + std::to_string(p.size));
  require(p.tensor.size() == static_cast<std::size_t>(p.size * p.size * 4), ErrorKind::data,
          "prototype tensor length does not match its size class");
  require(std::all_of(p.tensor.begin(), p.tensor.end(), [](float v) { return std::isfinite(v); }), ErrorKind::data,
          "prototype contains a non-finite value");
  require(!p.all_zero(), ErrorKind::data, "prototype is all-zero");
}

std::vector<std::uint8_t> encode_prototypes(const PrototypeSet& set) {
  ByteWriter w;
  w.magic("HMXP");
  w.u32(kPrototypeFormatVersion);
  w.u32(static_cast<std::uint32_t>(set.prototypes.size()));
  for (const Prototype& p : set.prototypes) {
    validate_prototype(p);
    w.u8(static_cast<std::uint8_t>(p.size));
    w.u8(static_cast<std::uint8_t>(p.origin));
    w.u8(static_cast<std::uint8_t>(p.band));
    w.u8(0);
    for (float v : p.tensor) w.f32(v);
  }
  return w.take();
}

PrototypeSet decode_prototypes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "prototype file");
  r.expect_magic("HMXP");
  const std::uint32_t version = r.u32();
  require(version == kPrototypeFormatVersion, ErrorKind::format,
          "unsupported prototype format version " + std::to_string(version));
  const std::uint32_t count = r.u32();

  PrototypeSet set;
  set.prototypes.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    Prototype p;
    p.size = r.u8();
    const std::uint8_t origin = r.u8();
    require(origin <= 1, ErrorKind::format, "unknown prototype origin " + std::to_string(origin));
    p.origin = static_cast<PrototypeOrigin>(origin);
    p.band = r.u8();
    r.u8();
    require(p.band >= 1 && p.band <= 8, ErrorKind::format, "prototype band out of range");
    const std::size_t n = static_cast<std::size_t>(p.size) * p.size * 4;
    p.tensor.resize(n);
    for (float& v : p.tensor) v = r.f32();
    validate_prototype(p);
    set.prototypes.push_back(std::move(p));
  }
  r.expect_end();
  if (!set.prototypes.empty()) set.origin = set.prototypes.front().origin;
  return set;
}

void save_prototypes(const PrototypeSet& set, const std::filesystem::path& path) {
  write_bytes(path, encode_prototypes(set));
}

PrototypeSet load_prototypes(const std::filesystem::path& path) { return decode_prototypes(read_bytes(path)); }

void dump_prototypes_text(const PrototypeSet& set, std::ostream& out) {
  const auto flags = out.flags();
  out << std::setprecision(9);
  for (std::size_t k = 0; k < set.prototypes.size(); ++k) {
    const Prototype& p = set.prototypes[k];
    out << "prototype " << k << " size " << p.size << " origin " << origin_name(p.origin) << " band " << p.band
        << "\n";
    for (int i = 0; i < p.size; ++i) {
      for (int j = 0; j < p.size * 4; ++j) {
        if (j) out << ' ';
        out << p.tensor[static_cast<std::size_t>(i * p.size * 4 + j)];
      }
      out << "\n";
    }
    out << "\n";
  }
  out.flags(flags);
}

}  // namespace hmax
