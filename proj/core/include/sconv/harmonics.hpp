#pragma once

#include <vector>

#include "sconv/types.hpp"

namespace sconv {

// Orthonormal basis on S^2: Y_{l,m}(theta, phi) = P_l^{|m|}(cos theta) e^{i m phi},
// with P normalised so that each Y has unit L^2 norm. Coefficients are stored
// at index l*l + l + m.
inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_count(int degree) { return (degree + 1) * (degree + 1); }

// All normalised associated Legendre values P_l^m(x), 0 <= m <= l <= degree,
// stored at l*(l+1)/2 + m. `s` must be sqrt(1 - x^2).
void legendre_all(int degree, double x, double s, double* out);
inline int legendre_index(int l, int m) { return l * (l + 1) / 2 + m; }

// Evaluate sum_{l<=degree} c_{l,m} Y_{l,m} at the unit vector p.
cplx sh_synthesize(const cplx* coeffs, int degree, const Vec3& p);

// Unnormalised Legendre polynomials P_0..P_n at x.
void legendre_polynomials(int n, double x, double* out);

}  // namespace sconv
