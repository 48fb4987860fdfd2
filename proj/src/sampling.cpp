#include "cutvip/sampling.hpp"

#include <cmath>
#include <numbers>

namespace cutvip {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Point Rng::uniform_box(const Point& lo, const Point& hi) {
  Point x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
  return x;
}

Point Rng::unit_direction(Eigen::Index n) {
  Point d(n);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) d[i] = normal();
    norm = d.norm();
  } while (norm < 1e-12);
  return d / norm;
}

SampleRegion SampleRegion::box(Point lo, Point hi, std::size_t count, std::uint64_t seed) {
  SampleRegion r;
  r.kind = Kind::box;
  r.lo = std::move(lo);
  r.hi = std::move(hi);
  r.count = count;
  r.seed = seed;
  r.validate();
  return r;
}

SampleRegion SampleRegion::shell(Point center, double r_inner, double r_outer, std::size_t count,
                                 std::uint64_t seed) {
  SampleRegion r;
  r.kind = Kind::sphere_shell;
  r.center = std::move(center);
  r.r_inner = r_inner;
  r.r_outer = r_outer;
  r.count = count;
  r.seed = seed;
  r.validate();
  return r;
}

Eigen::Index SampleRegion::dimension() const {
  return kind == Kind::box ? lo.size() : center.size();
}

void SampleRegion::validate() const {
  if (count < 1) throw InputError("SampleRegion: count must be >= 1");
  if (kind == Kind::box) {
    require_same_dimension(lo.size(), hi.size(), "SampleRegion::box");
    if (lo.size() < 1) throw InputError("SampleRegion: empty dimension");
    if (!all_finite(lo) || !all_finite(hi) || (hi - lo).minCoeff() < 0.0) {
      throw InputError("SampleRegion: box bounds must be finite with lo <= hi");
    }
  } else {
    if (center.size() < 1 || !all_finite(center)) throw InputError("SampleRegion: bad center");
    if (!(r_inner >= 0.0 && r_outer >= r_inner && std::isfinite(r_outer))) {
      throw InputError("SampleRegion: need 0 <= r_inner <= r_outer < inf");
    }
  }
}

std::vector<Point> sample_region(const SampleRegion& region) {
  region.validate();
  Rng rng(region.seed);
  std::vector<Point> out;
  out.reserve(region.count);
  if (region.kind == SampleRegion::Kind::box) {
    for (std::size_t i = 0; i < region.count; ++i) out.push_back(rng.uniform_box(region.lo, region.hi));
  } else {
    const Eigen::Index n = region.center.size();
    for (std::size_t i = 0; i < region.count; ++i) {
      const double radius = rng.uniform(region.r_inner, region.r_outer);
      out.push_back(region.center + radius * rng.unit_direction(n));
    }
  }
  return out;
}

std::vector<Point> sample_ball(const Point& center, double radius, std::size_t count,
                               std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index n = center.size();
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    out.push_back(center + r * rng.unit_direction(n));
  }
  return out;
}

std::function<std::vector<Point>(std::size_t, std::uint64_t)> rejection_sampler(
    std::function<bool(const Point&)> member, Point lo, Point hi) {
  require_same_dimension(lo.size(), hi.size(), "rejection_sampler");
  return [member = std::move(member), lo = std::move(lo), hi = std::move(hi)](std::size_t count,
                                                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t draws = 0; out.size() < count; ++draws) {
      if (draws >= 1000 * count) throw ConfigError("rejection_sampler: target set too thin in box");
      Point p = rng.uniform_box(lo, hi);
      if (member(p)) out.push_back(std::move(p));
    }
    return out;
  };
}

}  // namespace cutvip
