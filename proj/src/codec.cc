#include "rasp/codec.h"

#include <limits>

namespace rasp {

void ByteWriter::count(std::size_t n) {
  enforce(n <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::kInvalidArgument,
          "count does not fit in 32 bits");
  u32(static_cast<std::uint32_t>(n));
}

void ByteWriter::str(std::string_view s) {
  count(s.size());
  out_.insert(out_.end(), s.begin(), s.end());
}

void ByteWriter::vec(std::span<const double> v) {
  count(v.size());
  for (double x : v) f64(x);
}

void ByteWriter::matrix(const Matrix& m) {
  count(m.rows());
  count(m.cols());
  for (double x : m.values()) f64(x);
}

std::uint64_t ByteReader::get_le(int width) {
  enforce(remaining() >= static_cast<std::size_t>(width), ErrorCode::kMalformedMessage,
          "truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
  pos_ += static_cast<std::size_t>(width);
  return v;
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  enforce(remaining() >= n, ErrorCode::kMalformedMessage, "truncated input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Bytes ByteReader::bytes() {
  const std::size_t n = count();
  auto r = raw(n);
  return Bytes(r.begin(), r.end());
}

std::string ByteReader::str() {
  const std::size_t n = count();
  auto r = raw(n);
  return std::string(r.begin(), r.end());
}

Vec ByteReader::vec() {
  const std::size_t n = count();
  enforce(remaining() / 8 >= n, ErrorCode::kMalformedMessage, "truncated vector");
  Vec v(n);
  for (auto& x : v) x = f64();
  return v;
}

Matrix ByteReader::matrix() {
  const std::size_t rows = count();
  const std::size_t cols = count();
  enforce(cols == 0 || remaining() / 8 / cols >= rows, ErrorCode::kMalformedMessage,
          "truncated matrix");
  std::vector<double> values(rows * cols);
  for (auto& x : values) x = f64();
  return Matrix(rows, cols, std::move(values));
}

void ByteReader::expect_done() const {
  enforce(done(), ErrorCode::kMalformedMessage, "trailing bytes after message");
}

}  // namespace rasp
