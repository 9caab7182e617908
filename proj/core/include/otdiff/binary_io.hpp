#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "otdiff/common.hpp"

// Little-endian binary file helpers for the artifact containers.
static_assert(std::endian::native == std::endian::little,
              "artifact containers assume a little-endian host");

namespace otdiff {

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path.string()) {
    if (!out_) throw ConfigError("cannot open for writing: " + path_);
  }

  void write_bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  }
  void write_magic(const char (&magic)[5]) { write_bytes(magic, 4); }
  void write_u32(std::uint32_t v) { write_bytes(&v, sizeof(v)); }
  void write_u64(std::uint64_t v) { write_bytes(&v, sizeof(v)); }
  void write_f64(double v) { write_bytes(&v, sizeof(v)); }
  void write_f64s(std::span<const double> v) { write_bytes(v.data(), v.size() * sizeof(double)); }

  void close() {
    out_.close();
    if (!out_) throw ConfigError("write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw ConfigError("cannot open for reading: " + path_);
  }

  void read_bytes(void* data, std::size_t size) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (!in_) throw ConfigError("truncated file: " + path_);
  }
  void expect_magic(const char (&magic)[5]) {
    char buf[4];
    read_bytes(buf, 4);
    if (std::memcmp(buf, magic, 4) != 0) {
      throw ConfigError("bad magic in " + path_ + ", expected " + magic);
    }
  }
  std::uint32_t read_u32() {
    std::uint32_t v;
    read_bytes(&v, sizeof(v));
    return v;
  }
  std::uint64_t read_u64() {
    std::uint64_t v;
    read_bytes(&v, sizeof(v));
    return v;
  }
  double read_f64() {
    double v;
    read_bytes(&v, sizeof(v));
    return v;
  }
  std::vector<double> read_f64s(std::size_t count) {
    std::vector<double> v(count);
    read_bytes(v.data(), count * sizeof(double));
    return v;
  }
  bool at_eof() { return in_.peek() == std::ifstream::traits_type::eof(); }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace otdiff
