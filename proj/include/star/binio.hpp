#pragma once

#include <cstdint>
#include <string>

namespace star {

// Little-endian byte serialization used by every binary artifact, so files
// are identical across platforms regardless of host endianness.
void put_u32le(std::string& out, uint32_t v);
void put_u64le(std::string& out, uint64_t v);
void put_f32le(std::string& out, float v);
void put_f64le(std::string& out, double v);

// Cursor-based readers; all throw IntegrityError on truncation.
struct ByteReader {
  const std::string& data;
  size_t pos = 0;

  explicit ByteReader(const std::string& d) : data(d) {}
  uint32_t u32le();
  uint64_t u64le();
  float f32le();
  double f64le();
  std::string bytes(size_t n);
  size_t remaining() const { return data.size() - pos; }
};

// Writes via a temp file in the same directory, then renames over the
// target, so readers never observe a half-written artifact.
void atomic_write_file(const std::string& path, const std::string& data);

std::string read_file(const std::string& path);

}  // namespace star
