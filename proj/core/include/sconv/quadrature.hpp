#pragma once

#include <vector>

namespace sconv {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    // edge_rule only: distance from each node to the lower / upper end of its
    // panel, computed without cancellation.
    std::vector<double> dlo, dhi;
    std::size_t size() const { return x.size(); }
    void append(const Rule& other);
};

// n-point Gauss-Legendre rule on [a, b]; nodes ascending, exactly symmetric.
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Rule for integrands on [lo, hi] that may carry inverse square-root factors
// at either endpoint. Uses t = lo + (hi-lo)(1-cos th)/2 so that
// dt / sqrt((t-lo)(hi-t)) = dth, then composite Gauss-Legendre in th with
// geometric panels (ratio kGradeRatio) toward each end. Weights include dt/dth.
Rule edge_rule(double lo, double hi, int n, int levels_lo = 0, int levels_hi = 0);

// Same, over consecutive panels [b0,b1], [b1,b2], ... with grading toward every
// break point when `levels` > 0.
Rule edge_rule(const std::vector<double>& breaks, int n, int levels);

// Number of geometric levels needed near an end where the integrand varies on
// length scale `gap` inside an interval of length `width`.
int grading_levels(double gap, double width, int cap = 14);

// Grading depth at `end` of [lo, hi] driven by the nearest point of `special`
// lying outside the open interval; never below `floor_levels`.
int endpoint_levels(double end, double lo, double hi, const std::vector<double>& special, int floor_levels = 0);

constexpr double kGradeRatio = 0.2;

}  // namespace sconv
