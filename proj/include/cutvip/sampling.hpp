#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "cutvip/geometry.hpp"

namespace cutvip {

/// Seeded generator whose outputs are identical on every platform: raw mt19937_64 words mapped
/// by hand, since the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t next_u64() { return engine_(); }

  Point uniform_box(const Point& lo, const Point& hi);
  Point unit_direction(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Region of R^n sampled by the diagnostics; deterministic given the seed.
struct SampleRegion {
  enum class Kind { box, sphere_shell };

  Kind kind = Kind::box;
  Point lo, hi;             // box
  Point center;             // sphere_shell
  double r_inner = 0.0;     // sphere_shell, |x - center| in [r_inner, r_outer]
  double r_outer = 1.0;
  std::size_t count = 1;
  std::uint64_t seed = 0;

  static SampleRegion box(Point lo, Point hi, std::size_t count, std::uint64_t seed);
  static SampleRegion shell(Point center, double r_inner, double r_outer, std::size_t count,
                            std::uint64_t seed);

  Eigen::Index dimension() const;
  void validate() const;
};

std::vector<Point> sample_region(const SampleRegion& region);

/// Uniform samples from the ball B(center, radius).
std::vector<Point> sample_ball(const Point& center, double radius, std::size_t count,
                               std::uint64_t seed);

/// Sampler of {x in [lo, hi] : member(x)} by rejection; throws ConfigError when fewer than
/// `count` hits turn up within 1000 * count draws.
std::function<std::vector<Point>(std::size_t, std::uint64_t)> rejection_sampler(
    std::function<bool(const Point&)> member, Point lo, Point hi);

}  // namespace cutvip
