#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace perifront {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

// Axis-aligned box, used for probe windows and compact sets.
struct Box {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool contains(const Vec2& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PERIFRONT_ERROR(Name)                                      \
  struct Name : Error {                                            \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

PERIFRONT_ERROR(FeatureUnresolved);
PERIFRONT_ERROR(DisconnectedDomain);
PERIFRONT_ERROR(ProfileViolation);
PERIFRONT_ERROR(CflViolation);
PERIFRONT_ERROR(NonFiniteValue);
PERIFRONT_ERROR(NoPositiveSolution);
PERIFRONT_ERROR(EpsTooLarge);
PERIFRONT_ERROR(NotConverged);
PERIFRONT_ERROR(BetaSearchFailed);
PERIFRONT_ERROR(NoFront);
PERIFRONT_ERROR(ResidualPositive);
PERIFRONT_ERROR(RhoTooSmall);
PERIFRONT_ERROR(LevelNeverCrossed);
PERIFRONT_ERROR(NotConnected);
PERIFRONT_ERROR(ConfigError);

#undef PERIFRONT_ERROR

// splitmix64: deterministic, seed-stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ull) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

inline double sq(double v) { return v * v; }

// Least-squares line fit; returns {slope, intercept, r2}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
  LineFit out;
  const std::size_t n = t.size();
  if (n < 2) return out;
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) { st += t[i]; sy += y[i]; }
  const double mt = st / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += sq(t[i] - mt);
    sxy += (t[i] - mt) * (y[i] - my);
    syy += sq(y[i] - my);
  }
  if (sxx <= 0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mt;
  out.r2 = (syy > 0) ? sq(sxy) / (sxx * syy) : 1.0;
  return out;
}

}  // namespace perifront
