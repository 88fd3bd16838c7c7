#include "sconv/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace sconv {

void Rule::append(const Rule& other) {
    x.insert(x.end(), other.x.begin(), other.x.end());
    w.insert(w.end(), other.w.begin(), other.w.end());
    dlo.insert(dlo.end(), other.dlo.begin(), other.dlo.end());
    dhi.insert(dhi.end(), other.dhi.begin(), other.dhi.end());
}

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<long double, long double> legendre_pair(int n, long double x) {
    long double p0 = 1.0L, p1 = x;
    for (int k = 2; k <= n; ++k) {
        long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if (n == 0) return {1.0L, 0.0L};
    return {p1, n * (x * p1 - p0) / (x * x - 1.0L)};
}

// Newton polish of a library node; the weight follows from P_n'.
std::pair<double, double> polished(int n, double x0) {
    long double x = x0;
    for (int it = 0; it < 3; ++it) {
        auto [p, dp] = legendre_pair(n, x);
        x -= p / dp;
    }
    long double dp = legendre_pair(n, x).second;
    return {double(x), double(2.0L / ((1.0L - x * x) * dp * dp))};
}

const Rule& reference_rule(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        auto r = std::make_unique<Rule>();
        r->x.resize(n);
        r->w.resize(n);
        gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
        std::vector<std::pair<double, double>> pts(n);
        for (int i = 0; i < n; ++i) {
            gsl_integration_glfixed_point(-1.0, 1.0, i, &pts[i].first, &pts[i].second, t);
            if (n > 1 && pts[i].first != 0.0) pts[i] = polished(n, pts[i].first);
        }
        gsl_integration_glfixed_table_free(t);
        std::sort(pts.begin(), pts.end());
        // mirror so the rule is exactly symmetric about 0
        for (int k = 0; k < n / 2; ++k) {
            double xk = 0.5 * (pts[n - 1 - k].first - pts[k].first);
            double wk = 0.5 * (pts[n - 1 - k].second + pts[k].second);
            r->x[k] = -xk;
            r->x[n - 1 - k] = xk;
            r->w[k] = r->w[n - 1 - k] = wk;
        }
        if (n % 2 == 1) {
            r->x[n / 2] = 0.0;
            r->w[n / 2] = pts[n / 2].second;
        }
        slot = std::move(r);
    }
    return *slot;
}

}  // namespace

Rule gauss_legendre(int n, double a, double b) {
    const Rule& ref = reference_rule(n);
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        r.x[i] = c + h * ref.x[i];
        r.w[i] = h * ref.w[i];
    }
    return r;
}

int grading_levels(double gap, double width, int cap) {
    if (width <= 0.0) return 0;
    if (gap <= 0.0) return cap;
    double theta = 2.0 * std::sqrt(gap / width);
    if (theta >= 0.5) return 0;
    int lv = static_cast<int>(std::ceil(std::log(0.5 * M_PI / theta) / std::log(1.0 / kGradeRatio)));
    return std::clamp(lv, 0, cap);
}

int endpoint_levels(double end, double lo, double hi, const std::vector<double>& special, int floor_levels) {
    double gap = 1e300;
    for (double s : special) {
        if (s > lo + 1e-14 && s < hi - 1e-14) continue;
        double g = std::abs(s - end);
        if (g > 1e-14 * std::max(1.0, std::abs(end))) gap = std::min(gap, g);
    }
    int lv = gap < 1e299 ? grading_levels(gap, hi - lo) : 0;
    return std::max(lv, floor_levels);
}

Rule edge_rule(double lo, double hi, int n, int levels_lo, int levels_hi) {
    Rule out;
    if (!(hi > lo)) return out;
    // panel ends in th and the depth of each panel (0 away from the ends)
    std::vector<double> th{0.0};
    std::vector<int> depth;
    for (int k = levels_lo; k >= 1; --k) {
        th.push_back(0.5 * M_PI * std::pow(kGradeRatio, k));
        depth.push_back(k + 1);
    }
    th.push_back(0.5 * M_PI);
    depth.push_back(1);
    for (int k = 1; k <= levels_hi; ++k) {
        th.push_back(M_PI - 0.5 * M_PI * std::pow(kGradeRatio, k));
        depth.push_back(k);
    }
    th.push_back(M_PI);
    depth.push_back(levels_hi + 1);
    double half = 0.5 * (hi - lo);
    out.x.reserve((th.size() - 1) * n);
    out.w.reserve((th.size() - 1) * n);
    for (std::size_t p = 0; p + 1 < th.size(); ++p) {
        // panels deep inside a graded end carry geometrically less weight
        const int np = std::max(std::min(n, 4), n - std::max(0, depth[p] - 1));
        const Rule& ref = reference_rule(np);
        double c = 0.5 * (th[p] + th[p + 1]), h = 0.5 * (th[p + 1] - th[p]);
        for (int i = 0; i < np; ++i) {
            double t = c + h * ref.x[i];
            // lo + half*(1-cos t), written to keep precision near both ends
            double s2 = std::sin(0.5 * t);
            double c2 = std::cos(0.5 * t);
            double x = (t < 0.5 * M_PI) ? lo + 2.0 * half * s2 * s2 : hi - 2.0 * half * c2 * c2;
            out.x.push_back(x);
            out.dlo.push_back(2.0 * half * s2 * s2);
            out.dhi.push_back(2.0 * half * c2 * c2);
            out.w.push_back(h * ref.w[i] * half * std::sin(t));
        }
    }
    return out;
}

Rule edge_rule(const std::vector<double>& breaks, int n, int levels) {
    Rule out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) out.append(edge_rule(breaks[i], breaks[i + 1], n, levels, levels));
    return out;
}

}  // namespace sconv
