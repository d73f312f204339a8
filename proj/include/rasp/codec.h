#pragma once

// Little-endian binary writer/reader. 64-bit floats are copied bit-for-bit.

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rasp/envelope.h"
#include "rasp/error.h"
#include "rasp/linalg.h"

namespace rasp {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }
  void count(std::size_t n);
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
  void bytes(std::span<const std::uint8_t> b) {
    count(b.size());
    raw(b);
  }
  void str(std::string_view s);
  void vec(std::span<const double> v);
  void matrix(const Matrix& m);

  const Bytes& data() const& noexcept { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(get_le(8)); }
  std::size_t count() { return u32(); }
  std::span<const std::uint8_t> raw(std::size_t n);
  Bytes bytes();
  std::string str();
  Vec vec();
  Matrix matrix();

  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  bool done() const noexcept { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  std::uint64_t get_le(int width);
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace rasp
