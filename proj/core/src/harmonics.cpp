#include "sconv/harmonics.hpp"

#include <algorithm>
#include <vector>

namespace sconv {

namespace {

struct RecurrenceTable {
    int max_degree = -1;
    std::vector<double> a, b;   // three-term coefficients at legendre_index(l, m)
    std::vector<double> diag;   // sqrt((2m+1)/(2m))
    std::vector<double> sub;    // sqrt(2m+3)
};

constexpr int kMaxDegree = 640;

RecurrenceTable build_table(int D) {
    RecurrenceTable t;
    t.max_degree = D;
    int n = legendre_index(D, D) + 1;
    t.a.assign(n, 0.0);
    t.b.assign(n, 0.0);
    t.diag.assign(D + 1, 0.0);
    t.sub.assign(D + 1, 0.0);
    for (int m = 0; m <= D; ++m) {
        t.diag[m] = m == 0 ? 0.0 : std::sqrt((2.0 * m + 1.0) / (2.0 * m));
        t.sub[m] = std::sqrt(2.0 * m + 3.0);
        for (int l = m + 2; l <= D; ++l) {
            double l2 = double(l) * l, m2 = double(m) * m, lm1 = double(l - 1) * (l - 1);
            t.a[legendre_index(l, m)] = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
            t.b[legendre_index(l, m)] = std::sqrt((lm1 - m2) / (4.0 * lm1 - 1.0));
        }
    }
    return t;
}

const RecurrenceTable& recurrence(int degree) {
    static const RecurrenceTable table = build_table(kMaxDegree);
    if (degree > kMaxDegree) throw ValidationError("harmonic degree above supported maximum");
    return table;
}

}  // namespace

void legendre_all(int degree, double x, double s, double* out) {
    const RecurrenceTable& t = recurrence(degree);
    double pmm = std::sqrt(1.0 / (4.0 * M_PI));
    for (int m = 0; m <= degree; ++m) {
        if (m > 0) pmm *= t.diag[m] * s;
        out[legendre_index(m, m)] = pmm;
        if (m + 1 <= degree) out[legendre_index(m + 1, m)] = t.sub[m] * x * pmm;
        for (int l = m + 2; l <= degree; ++l) {
            int k = legendre_index(l, m);
            out[k] = t.a[k] * (x * out[legendre_index(l - 1, m)] - t.b[k] * out[legendre_index(l - 2, m)]);
        }
    }
}

cplx sh_synthesize(const cplx* c, int degree, const Vec3& p) {
    if (degree <= 0) return c[0] * std::sqrt(1.0 / (4.0 * M_PI));
    const RecurrenceTable& t = recurrence(degree);
    double x = std::clamp(p[2], -1.0, 1.0);
    double s = std::hypot(p[0], p[1]);
    cplx e = s > 1e-300 ? cplx(p[0] / s, p[1] / s) : cplx(1.0, 0.0);
    cplx em(1.0, 0.0);
    cplx total(0.0, 0.0);
    double pmm = std::sqrt(1.0 / (4.0 * M_PI));
    for (int m = 0; m <= degree; ++m) {
        if (m > 0) {
            pmm *= t.diag[m] * s;
            em *= e;
        }
        double p2 = pmm;
        double p1 = (m + 1 <= degree) ? t.sub[m] * x * pmm : 0.0;
        cplx sp = c[sh_index(m, m)] * p2;
        cplx sn = m > 0 ? c[sh_index(m, -m)] * p2 : cplx(0.0);
        if (m + 1 <= degree) {
            sp += c[sh_index(m + 1, m)] * p1;
            if (m > 0) sn += c[sh_index(m + 1, -m)] * p1;
        }
        for (int l = m + 2; l <= degree; ++l) {
            int k = legendre_index(l, m);
            double pl = t.a[k] * (x * p1 - t.b[k] * p2);
            sp += c[sh_index(l, m)] * pl;
            if (m > 0) sn += c[sh_index(l, -m)] * pl;
            p2 = p1;
            p1 = pl;
        }
        total += em * sp;
        if (m > 0) total += std::conj(em) * sn;
        if (pmm == 0.0) break;
    }
    return total;
}

void legendre_polynomials(int n, double x, double* out) {
    out[0] = 1.0;
    if (n >= 1) out[1] = x;
    for (int l = 2; l <= n; ++l) out[l] = ((2.0 * l - 1.0) * x * out[l - 1] - (l - 1.0) * out[l - 2]) / l;
}

}  // namespace sconv
