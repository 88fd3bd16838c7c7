#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace sconv {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

// Bad input: wrong dimension, malformed parameters, mismatched grids.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The request is well formed but mathematically refused (inadmissible pair,
// point inside a singular offset, degenerate fixed point).
struct NumericalRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Surface area of S^{d-1}.
inline double sphere_area(int d) { return 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0); }

// Orthonormal pair spanning the plane perpendicular to the unit vector u (d = 3).
void perpendicular_frame(const Vec3& u, Vec3& e1, Vec3& e2);

}  // namespace sconv
