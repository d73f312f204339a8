#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace rasp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Axis-aligned minimum bounding region with closed bounds.
class Mbr {
 public:
  Mbr() = default;
  explicit Mbr(std::vector<Interval> extent) : extent_(std::move(extent)) {}

  // lo = +inf, hi = -inf in every dimension; expands to anything.
  static Mbr empty(std::size_t dims);
  static Mbr point(std::span<const double> p);

  std::size_t dimensions() const noexcept { return extent_.size(); }
  const Interval& operator[](std::size_t i) const { return extent_[i]; }
  Interval& operator[](std::size_t i) { return extent_[i]; }
  std::span<const Interval> extent() const noexcept { return extent_; }

  bool contains(std::span<const double> p) const;
  bool intersects(const Mbr& other) const;
  bool encloses(const Mbr& other) const;

  void expand(std::span<const double> p);
  void expand(const Mbr& other);

  double volume() const;
  double margin() const;
  // Volume of the intersection (0 when disjoint).
  double overlap(const Mbr& other) const;
  // Volume growth if other were merged in.
  double enlargement(const Mbr& other) const;

  friend bool operator==(const Mbr&, const Mbr&) = default;

 private:
  std::vector<Interval> extent_;
};

}  // namespace rasp
