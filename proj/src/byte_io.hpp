#pragma once

// Little-endian encoding helpers shared by the binary containers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace ave::detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t>& bytes() { return bytes_; }
  void clear() { bytes_.clear(); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

inline std::uint64_t load_le(const std::uint8_t* p, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline float load_f32(const std::uint8_t* p) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(load_le(p, 4)));
}

inline double load_f64(const std::uint8_t* p) { return std::bit_cast<double>(load_le(p, 8)); }

}  // namespace ave::detail
