#include "star/binio.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "star/error.hpp"

namespace star {

void put_u32le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64le(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f32le(std::string& out, float v) {
  uint32_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32le(out, bits);
}

void put_f64le(std::string& out, double v) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64le(out, bits);
}

uint32_t ByteReader::u32le() {
  if (pos + 4 > data.size()) throw IntegrityError("binary read past end");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(data[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

uint64_t ByteReader::u64le() {
  if (pos + 8 > data.size()) throw IntegrityError("binary read past end");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(data[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

float ByteReader::f32le() {
  uint32_t bits = u32le();
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

double ByteReader::f64le() {
  uint64_t bits = u64le();
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string ByteReader::bytes(size_t n) {
  if (pos + n > data.size()) throw IntegrityError("binary read past end");
  std::string out = data.substr(pos, n);
  pos += n;
  return out;
}

void atomic_write_file(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(data.data(), std::streamsize(data.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot rename " + tmp + " to " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error("read failed for " + path);
  return buffer.str();
}

}  // namespace star
