#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergosol {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Fractional part mapped into [0, 1).
inline double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;
    if (f < 0.0) f += 1.0;
    return f;
}

/// Distance on the unit circle R/Z.
inline double circle_dist(double a, double b) {
    double d = std::fabs(frac(a) - frac(b));
    return d <= 0.5 ? d : 1.0 - d;
}

/// Forward arc length from a to b on the unit circle.
inline double forward_arc(double a, double b) { return frac(b - a); }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Points in T^n (n <= 3); unused trailing coordinates stay zero.
using Vec = std::array<double, 3>;

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Shortest-geodesic displacement from a to b on T^n.
inline Vec torus_delta(const Vec& a, const Vec& b, int dim) {
    Vec d{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) {
        double t = frac(b[i] - a[i]);
        d[i] = t <= 0.5 ? t : t - 1.0;
    }
    return d;
}

inline double torus_dist(const Vec& a, const Vec& b, int dim) { return norm(torus_delta(a, b, dim)); }

/// Deterministic uniforms; bit-stable across platforms (no std distributions).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t next_u64() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace ergosol
