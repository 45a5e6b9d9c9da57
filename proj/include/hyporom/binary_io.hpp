#pragma once

// Little-endian envelope shared by the snapshot, basis and operator files:
// an 8-byte magic, a u32 version, a payload, and a trailing CRC32 of every
// preceding byte.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "hyporom/errors.hpp"

namespace hyporom::io {

static_assert(std::endian::native == std::endian::little, "binary files are written in host order");

inline constexpr std::uint32_t kFormatVersion = 1;

class ByteWriter {
 public:
  void magic(std::string_view m) { raw(m.data(), m.size()); }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void f64s(const double* p, std::size_t n) { raw(p, 8 * n); }
  void label(const std::string& s) {
    if (s.size() > 255) fail(ErrorCode::IoError, "label longer than 255 bytes: " + s);
    u8(static_cast<std::uint8_t>(s.size()));
    raw(s.data(), s.size());
  }

  /// Appends the CRC32 trailer and writes everything to `path`.
  void commit(const std::string& path) {
    const std::uint32_t crc = checksum(bytes_.data(), bytes_.size());
    u32(crc);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes_.data()), static_cast<std::streamsize>(bytes_.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
  }

  std::size_t size() const { return bytes_.size(); }

  static std::uint32_t checksum(const unsigned char* p, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(crc32(crc, p, static_cast<uInt>(n)));
  }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }

  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  /// Loads `path`, checks the magic, the CRC trailer and the version.
  ByteReader(const std::string& path, std::string_view expected_magic) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (bytes_.size() < expected_magic.size() + 8) fail(ErrorCode::ChecksumMismatch, path + " is truncated");
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes_.data() + bytes_.size() - 4, 4);
    end_ = bytes_.size() - 4;
    const auto crc = ByteWriter::checksum(bytes_.data(), end_);
    if (crc != stored) fail(ErrorCode::ChecksumMismatch, path + ": CRC32 does not match contents");
    if (std::string_view(reinterpret_cast<const char*>(bytes_.data()), expected_magic.size()) != expected_magic) {
      fail(ErrorCode::IoError, path + ": bad magic, expected " + std::string(expected_magic));
    }
    pos_ = expected_magic.size();
    const std::uint32_t version = u32();
    if (version != kFormatVersion) {
      fail(ErrorCode::FormatVersionMismatch, path + ": version " + std::to_string(version));
    }
  }

  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  void f64s(double* p, std::size_t n) { raw(p, 8 * n); }
  std::string label() {
    const std::size_t n = u8();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  bool exhausted() const { return pos_ == end_; }

 private:
  void raw(void* p, std::size_t n) {
    if (pos_ + n > end_) fail(ErrorCode::ChecksumMismatch, path_ + ": payload shorter than its header claims");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::string path_;
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace hyporom::io
