#include "hmax/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hmax/error.hpp"

namespace hmax {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void ByteWriter::magic(std::string_view tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }
void ByteWriter::u32(std::uint32_t v) { put_le(bytes_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(bytes_, v); }
void ByteWriter::f32(float v) { put_le(bytes_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { put_le(bytes_, std::bit_cast<std::uint64_t>(v)); }

const std::uint8_t* ByteReader::take(std::size_t n) {
  require(bytes_.size() - pos_ >= n, ErrorKind::format, what_ + " is truncated");
  const std::uint8_t* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

void ByteReader::expect_magic(std::string_view tag) {
  const std::uint8_t* p = take(tag.size());
  require(std::memcmp(p, tag.data(), tag.size()) == 0, ErrorKind::format,
          what_ + ": bad magic (expected \"" + std::string(tag) + "\")");
}

std::uint8_t ByteReader::u8() { return *take(1); }
std::uint32_t ByteReader::u32() { return get_le<std::uint32_t>(take(4)); }
std::uint64_t ByteReader::u64() { return get_le<std::uint64_t>(take(8)); }
float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::expect_end() const {
  require(pos_ == bytes_.size(), ErrorKind::format, what_ + " has trailing bytes");
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::io, "read failed for " + path.string());
  return bytes;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

}  // namespace hmax
