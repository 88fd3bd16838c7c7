#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sconv/sphere.hpp"

namespace sconv {

enum class PairClass { interior, boundary, inadmissible };

struct AdmissiblePair {
    int d = 0, m = 0;
    PairClass cls = PairClass::inadmissible;
    double alpha = 0.0;  // (d-1)(m-2)/2 - 1
    std::string label() const;
    bool admissible() const { return cls != PairClass::inadmissible; }
};

AdmissiblePair classify(int d, int m);

// Distance from the declared singular set within which evaluation is refused.
constexpr double kSingularOffset = 1e-8;

// Average of h1(nu) h2(y - nu) over the set of nu on the sphere with y - nu
// also on the sphere (a circle for d = 3, two points for d = 2).
cplx pair_average(const SphereField& h1, const SphereField& h2, const Vec3& y, int extra_points = 0);

// pair_average for a fixed pair, precomputed. For d = 2 the average is
//   sum_{n,k} a_n b_k e^{i(n+k)theta} T_{|n-k|}(|y|/2)
// with a, b the Fourier coefficients of h1, h2 and theta the angle of y.
class PairKernel {
public:
    PairKernel() = default;
    PairKernel(const SphereField& h1, const SphereField& h2, int extra_points = 0);
    cplx operator()(const Vec3& y) const;

private:
    SphereField h1_, h2_;
    int extra_ = 0;
    int span_ = 0;            // d = 2: largest |n + k|
    std::vector<cplx> table_;  // d = 2: (J + span) * (span + 1) + |n - k|
};

// (h1 sigma * h2 sigma)(x), d in {2, 3}.
cplx two_fold_density(const SphereField& h1, const SphereField& h2, const Vec3& x);

// Closed-form density of sigma * sigma.
double two_fold_constant(int d, double r);

// Pointwise evaluator for f_1 sigma * ... * f_k sigma.
class ConvDensity {
public:
    explicit ConvDensity(std::vector<SphereField> factors, int refine = 0);

    int dim() const { return dim_; }
    int order() const { return static_cast<int>(factors_.size()); }
    double support_radius() const { return double(order()); }
    // Radii |x| at which the density is infinite.
    const std::vector<double>& singular_radii() const { return singular_; }
    const std::vector<SphereField>& factors() const { return factors_; }
    int refine() const { return refine_; }
    ConvDensity refined(int extra) const { return ConvDensity(factors_, refine_ + extra); }

    // Throws NumericalRefusal inside the singular offset.
    cplx operator()(const Vec3& x) const;
    // Value together with |value - value at the next refinement|.
    std::pair<cplx, double> with_error(const Vec3& x) const;

    // Density of the first j factors at x (no offset checks).
    cplx prefix(int j, const Vec3& x) const;
    // |y| times prefix(j, y), bounded near y = 0 for j = 2.
    cplx reduced_prefix(int j, const Vec3& y) const;

private:
    std::vector<SphereField> factors_;
    PairKernel first_pair_, second_pair_;
    std::vector<int> degree_sum_;
    std::vector<double> singular_;
    int dim_ = 0;
    int refine_ = 0;
};

// Singular radii of a j-fold density, and radii where it fails to be smooth.
std::vector<double> singular_radii(int d, int j);
std::vector<double> kink_radii(int d, int j);

// M(f_1, ..., f_{m+1})(w) at every grid node, m = factors.size() - 1.
SphereField m_operator(const std::vector<SphereField>& factors, int refine = 0);

// L[phi_1..phi_m](g) = M(phi_1, ..., phi_m, g).
SphereField l_operator(const std::vector<SphereField>& phis, const SphereField& g, int refine = 0);

// w -> int f(nu) |w - nu|^{-gamma} H(w - nu) dsigma(nu).
SphereField k_gamma_apply(const std::function<cplx(const Vec3&)>& H, double support_radius, double gamma,
                          const SphereField& f);

// CSV rows: x components, re, im, estimated error.
void tabulate_csv(const ConvDensity& density, const std::vector<Vec3>& points, std::ostream& out);

// Two-centre bipolar integral in d = 2:
//   sum over both mirror points of int value(y, x - y) F(y) F(x - y) dy,
// F = sigma * sigma, over |x - y| in [s_lo, s_hi]. The second argument is
// computed directly rather than by subtraction.
cplx bipolar_integral(const Vec3& x, const std::function<cplx(const Vec3&, const Vec3&)>& value,
                      double s_lo = 0.0, double s_hi = 2.0, int refine = 0);

}  // namespace sconv
