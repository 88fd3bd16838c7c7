#pragma once

#include <vector>

#include "sconv/sphere.hpp"

namespace sconv {

struct FunctionalValue {
    int d = 0, q = 0;
    double phi = 0.0;
    double l2norm = 0.0;
    double lambda = 0.0;  // equals phi by construction
    double q_conj = 0.0;  // q / (q - 1)
};

// int f(w) e^{-i x.w} dsigma(w), by grid quadrature; accurate while |x| is
// small next to the grid band limit.
cplx extension(const SphereField& f, const Vec3& x);

// Phi_{d,q}(f) = (2pi)^d ||(f sigma)^{*n}||^2 / ||f||^{2n}, q = 2n, using
// ||(f sigma)^{*n}||^2 = < M(f,..,f, f*,..,f*), f > with n copies of f and
// n-1 of the conjugate reflection f*.
FunctionalValue phi_functional(const SphereField& f, int q, int refine = 0);

// Factor list (R^{k_1} f, ..., R^{k_{m+1}} f) with R the conjugate reflection.
std::vector<SphereField> reflected_factors(const SphereField& f, const std::vector<int>& flags);

// (2pi)^d < a M(R^{k_1} f, ...), f > / ||f||^{m+2}; a = nullptr means a = 1.
double lambda_check(const SphereField& f, const std::vector<int>& flags, const SphereField* a = nullptr,
                    int refine = 0);

// Truncated direct value of int_{|x| <= radius} |E f(x)|^q dx for a
// band-limited f on S^2, using E f(r t) = 4pi sum_l (-i)^l j_l(r) f_l(t) with
// f_l the degree-l part. Radial Gauss-Legendre panels of unit length times a
// product rule on S^2 exact for |E f|^q at fixed r.
double truncated_lq_power(const SphereField& f, int q, double radius, int angular_resolution);

}  // namespace sconv
