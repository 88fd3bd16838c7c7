#include <algorithm>
#include <cmath>
#include <vector>

#include "sconv/conv.hpp"
#include "sconv/quadrature.hpp"

namespace sconv {

namespace {

// Gauss-Legendre panels on [t0, t1] of widths 1.5, 6, 24, ... counted from t1;
// the panel touching t0 is split geometrically `levels` times toward t0.
void log_panels(double t0, double t1, const Rule& ref, int levels, std::vector<double>& x, std::vector<double>& w) {
    x.clear();
    w.clear();
    auto panel = [&](double lo, double hi) {
        double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            x.push_back(c + h * ref.x[i]);
            w.push_back(h * ref.w[i]);
        }
    };
    double hi = t1, step = 1.5;
    while (hi > t0) {
        double lo = std::max(t0, hi - step);
        if (lo - t0 < 0.5 * step) lo = t0;
        if (lo == t0) {
            for (int k = 0; k < levels; ++k) {
                double mid = t0 + kGradeRatio * (hi - t0);
                panel(mid, hi);
                hi = mid;
            }
        }
        panel(lo, hi);
        hi = lo;
        step *= 4.0;
    }
}

// acosh(1 + excess / base) without cancellation.
double acosh_from(double excess, double base) {
    double t = excess / base;
    return std::log1p(t + std::sqrt(t * (t + 2.0)));
}

}  // namespace

cplx bipolar_integral(const Vec3& x, const std::function<cplx(const Vec3&, const Vec3&)>& value, double s_lo, double s_hi,
                      int refine) {
    const int na = 8 + 2 * refine, nb = 8 + 2 * refine, deep = 5 + refine, corner = 6 + refine;
    double R = std::hypot(x[0], x[1]);
    if (R <= 0.0) throw NumericalRefusal("bipolar coordinates need x != 0");
    if (R >= 4.0) return 0.0;
    s_lo = std::max(0.0, s_lo);
    s_hi = std::min(2.0, s_hi);
    if (s_hi <= s_lo) return 0.0;
    const double ux = x[0] / R, uy = x[1] / R;
    const double A = std::min(R, 4.0 - R);
    auto b_lo = [&](double a) { return std::max(R, a + 2.0 * s_lo); };
    auto b_hi = [&](double a) { return std::min(4.0 - std::abs(a), a + 2.0 * s_hi); };
    std::vector<double> breaks{-A, 0.0, A, R - 2.0 * s_lo, 2.0 - s_hi, 2.0 - s_lo, R - 2.0 * s_hi, 4.0 - R, R - 4.0};
    std::vector<double> cuts;
    for (double b : breaks)
        if (b >= -A && b <= A) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double p, double q) { return std::abs(p - q) < 1e-15; }),
               cuts.end());
    std::vector<double> a_special{0.0, R, -R, A, -A, 4.0 - R, R - 4.0};
    a_special.insert(a_special.end(), cuts.begin(), cuts.end());
    const Rule ref = gauss_legendre(nb);
    std::vector<double> wx, ww, vx, vw;
    cplx total(0.0);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double a0 = cuts[c], a1 = cuts[c + 1];
        double mid = 0.5 * (a0 + a1);
        if (!(b_hi(mid) > b_lo(mid))) continue;
        auto end_levels = [&](double e) {
            if (e == 0.0) return deep;
            return endpoint_levels(e, a0, a1, a_special, std::abs(e) == R && s_lo == 0.0 ? corner : 0);
        };
        int l0 = end_levels(a0), l1 = end_levels(a1);
        Rule ar = edge_rule(a0, a1, na, l0, l1);
        for (std::size_t ia = 0; ia < ar.size(); ++ia) {
            double a = ar.x[ia], aa = std::abs(a);
            double blo = b_lo(a), bhi = b_hi(a);
            if (!(bhi > blo)) continue;
            double rm = (R - a1) + ar.dhi[ia], rp = (R + a0) + ar.dlo[ia];  // R - a, R + a
            double ra2 = rm * rp;
            double bm = 0.5 * (blo + bhi);
            // lower piece: b = R cosh w
            int wl = 0;
            if (blo == R) {
                // y or x - y approaches 0 at w = 0 when a is near -R or R
                double gap = std::min(rm, rp);
                double wstar = std::sqrt(2.0 * gap / R);
                wl = wstar < 1.5 ? std::min(corner, int(std::ceil(std::log(1.5 / wstar) / std::log(1.0 / kGradeRatio)))) : 0;
            }
            log_panels(acosh_from(blo - R, R), acosh_from(bm - R, R), ref, wl, wx, ww);
            // upper piece: 4 - b = |a| cosh v
            log_panels(acosh_from((4.0 - aa) - bhi, aa), acosh_from((4.0 - aa) - bm, aa), ref, 0, vx, vw);
            cplx inner(0.0);
            // e = b - R, bb = b^2 - R^2, j = weight including the Jacobian
            auto emit = [&](double e, double bb, double j) {
                double y1 = (R * rp + a * e) / (2.0 * R);
                double z1 = (R * rm - a * e) / (2.0 * R);  // R - y1
                double y2 = std::sqrt(bb * ra2) / (2.0 * R);
                Vec3 yp{ux * y1 - uy * y2, uy * y1 + ux * y2, 0.0};
                Vec3 zp{ux * z1 + uy * y2, uy * z1 - ux * y2, 0.0};
                Vec3 ym{ux * y1 + uy * y2, uy * y1 - ux * y2, 0.0};
                Vec3 zm{ux * z1 - uy * y2, uy * z1 + ux * y2, 0.0};
                inner += j * (value(yp, zp) + value(ym, zm));
            };
            for (std::size_t i = 0; i < wx.size(); ++i) {
                double sh = std::sinh(wx[i]), sh2 = std::sinh(0.5 * wx[i]);
                double b = R * std::cosh(wx[i]);
                double q = (4.0 - b - aa) * (4.0 - b + aa);
                if (!(q > 0.0)) continue;  // rounding at the outer rim
                emit(2.0 * R * sh2 * sh2, R * R * sh * sh, ww[i] * 64.0 / std::sqrt(q * ((4.0 + b) * (4.0 + b) - a * a)));
            }
            for (std::size_t i = 0; i < vx.size(); ++i) {
                double b = 4.0 - aa * std::cosh(vx[i]);
                double bb = (b - R) * (b + R);
                if (!(bb > 0.0)) continue;
                emit(b - R, bb, vw[i] * 64.0 / std::sqrt(bb * ((4.0 + b) * (4.0 + b) - a * a)));
            }
            total += ar.w[ia] / std::sqrt(ra2) * inner;
        }
    }
    return total;
}
}  // namespace sconv
