#include "rasp/mbr.h"

#include <algorithm>
#include <limits>

#include "rasp/error.h"

namespace rasp {

Mbr Mbr::empty(std::size_t dims) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return Mbr(std::vector<Interval>(dims, Interval{inf, -inf}));
}

Mbr Mbr::point(std::span<const double> p) {
  std::vector<Interval> extent(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) extent[i] = {p[i], p[i]};
  return Mbr(std::move(extent));
}

bool Mbr::contains(std::span<const double> p) const {
  enforce(p.size() == extent_.size(), ErrorCode::kInvalidArgument, "point/MBR dimension mismatch");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!extent_[i].contains(p[i])) return false;
  return true;
}

bool Mbr::intersects(const Mbr& other) const {
  for (std::size_t i = 0; i < extent_.size(); ++i)
    if (extent_[i].lo > other.extent_[i].hi || other.extent_[i].lo > extent_[i].hi) return false;
  return true;
}

bool Mbr::encloses(const Mbr& other) const {
  for (std::size_t i = 0; i < extent_.size(); ++i)
    if (other.extent_[i].lo < extent_[i].lo || other.extent_[i].hi > extent_[i].hi) return false;
  return true;
}

void Mbr::expand(std::span<const double> p) {
  for (std::size_t i = 0; i < extent_.size(); ++i) {
    extent_[i].lo = std::min(extent_[i].lo, p[i]);
    extent_[i].hi = std::max(extent_[i].hi, p[i]);
  }
}

void Mbr::expand(const Mbr& other) {
  for (std::size_t i = 0; i < extent_.size(); ++i) {
    extent_[i].lo = std::min(extent_[i].lo, other.extent_[i].lo);
    extent_[i].hi = std::max(extent_[i].hi, other.extent_[i].hi);
  }
}

double Mbr::volume() const {
  double v = 1.0;
  for (const auto& e : extent_) v *= std::max(0.0, e.length());
  return v;
}

double Mbr::margin() const {
  double m = 0.0;
  for (const auto& e : extent_) m += std::max(0.0, e.length());
  return m;
}

double Mbr::overlap(const Mbr& other) const {
  double v = 1.0;
  for (std::size_t i = 0; i < extent_.size(); ++i) {
    const double lo = std::max(extent_[i].lo, other.extent_[i].lo);
    const double hi = std::min(extent_[i].hi, other.extent_[i].hi);
    if (hi <= lo) return 0.0;
    v *= hi - lo;
  }
  return v;
}

double Mbr::enlargement(const Mbr& other) const {
  Mbr merged = *this;
  merged.expand(other);
  return merged.volume() - volume();
}

}  // namespace rasp
