#include "sconv/conv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sconv/harmonics.hpp"
#include "sconv/parallel.hpp"
#include "sconv/quadrature.hpp"

namespace sconv {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr int kDeepLevels = 5;

int radial_points(int degree, int refine) { return 8 + degree / 2 + 4 * refine; }

bool near_any(double r, const std::vector<double>& set, double tol) {
    for (double s : set)
        if (std::abs(r - s) <= tol) return true;
    return false;
}

// Radii where the reduced j-fold density is still unbounded.
std::vector<double> deep_radii(int d, int j) {
    if (d == 2 && j == 3) return {1.0};
    if (d == 2 && j == 4) return {0.0};
    return {};
}

struct RadialNode {
    double r, w;
    double below;  // r - |R - 1|
    double above;  // (R + 1) - r
};

// Radial nodes r = |x - nu| for an outer sphere integral at |x| = R, where
// the inner density lives on |y| <= support and is non-smooth on `kinks`
// and unbounded on `deep`.
std::vector<RadialNode> radial_nodes(double R, double support, const std::vector<double>& kinks,
                                     const std::vector<double>& deep, int n, int refine) {
    const double lo = std::abs(R - 1.0), top = R + 1.0;
    const double hi = std::min(top, support);
    std::vector<RadialNode> out;
    if (!(hi > lo)) return out;
    std::vector<double> breaks{lo};
    for (double k : kinks)
        if (k > lo + 1e-14 && k < hi - 1e-14) breaks.push_back(k);
    for (double k : deep)
        if (k > lo + 1e-14 && k < hi - 1e-14) breaks.push_back(k);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<double> special{lo, -lo, top, -top, support, -support};
    for (double k : kinks) special.insert(special.end(), {k, -k});
    for (double k : deep) special.insert(special.end(), {k, -k});

    auto levels = [&](double e, double p0, double p1) {
        if (near_any(e, deep, 1e-14)) return kDeepLevels + refine;
        return endpoint_levels(e, p0, p1, special);
    };
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        double p0 = breaks[p], p1 = breaks[p + 1];
        Rule rule = edge_rule(p0, p1, n, levels(p0, p0, p1), levels(p1, p0, p1));
        for (std::size_t i = 0; i < rule.size(); ++i) {
            double below = (p0 - lo) + rule.dlo[i];
            double above = (top - p1) + rule.dhi[i];
            out.push_back({rule.x[i], rule.w[i], below, above});
        }
    }
    return out;
}

// int P(x - nu, q) f(nu) dsigma(nu) with P the reduced inner density
// |y| H(y) and q the radial node index.
template <class Reduced>
cplx outer_integral(const Vec3& x, int d, const std::vector<RadialNode>& nodes, int npsi, Reduced&& P,
                    const SphereField& f) {
    const double R = norm(x);
    const double lo = std::abs(R - 1.0), top = R + 1.0;
    const Vec3 xh = (1.0 / R) * x;
    cplx total(0.0);
    if (d == 3) {
        Vec3 e1, e2;
        perpendicular_frame(xh, e1, e2);
        std::vector<double> cs(npsi), sn(npsi);
        for (int a = 0; a < npsi; ++a) {
            cs[a] = std::cos(kTwoPi * a / npsi);
            sn[a] = std::sin(kTwoPi * a / npsi);
        }
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const auto& nd = nodes[q];
            double c = (R * R + 1.0 - nd.r * nd.r) / (2.0 * R);
            double s = std::sqrt(std::max(0.0, nd.below * (nd.r + lo) * nd.above * (top + nd.r))) / (2.0 * R);
            cplx ring(0.0);
            for (int a = 0; a < npsi; ++a) {
                Vec3 nu{c * xh[0] + s * (cs[a] * e1[0] + sn[a] * e2[0]), c * xh[1] + s * (cs[a] * e1[1] + sn[a] * e2[1]),
                        c * xh[2] + s * (cs[a] * e1[2] + sn[a] * e2[2])};
                ring += P(x - nu, q) * f(nu);
            }
            total += nd.w * ring;
        }
        return total * (kTwoPi / npsi / R);
    }
    const Vec3 xp{-xh[1], xh[0], 0.0};
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const auto& nd = nodes[q];
        double c = (R * R + 1.0 - nd.r * nd.r) / (2.0 * R);
        double rs = 0.5 * std::sqrt(nd.below * (nd.r + lo) * nd.above * (top + nd.r));  // R sin(psi)
        double s = rs / R;
        Vec3 np{c * xh[0] + s * xp[0], c * xh[1] + s * xp[1], 0.0};
        Vec3 nm{c * xh[0] - s * xp[0], c * xh[1] - s * xp[1], 0.0};
        total += (nd.w / rs) * (P(x - np, q) * f(np) + P(x - nm, q) * f(nm));
    }
    return total;
}

// Plain product rule for |x| so small that the pole-aligned form loses precision.
template <class Dense>
cplx direct_integral(const Vec3& x, int d, int degree, Dense&& H, const SphereField& f) {
    cplx total(0.0);
    if (d == 2) {
        int n = 2 * degree + 64;
        for (int a = 0; a < n; ++a) {
            double t = kTwoPi * a / n;
            Vec3 nu{std::cos(t), std::sin(t), 0.0};
            total += H(x - nu) * f(nu);
        }
        return total * (kTwoPi / n);
    }
    int nl = degree / 2 + 24;
    Rule lat = gauss_legendre(nl);
    int nphi = degree + 48;
    for (int i = 0; i < nl; ++i) {
        double z = lat.x[i], s = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int a = 0; a < nphi; ++a) {
            double t = kTwoPi * a / nphi;
            Vec3 nu{s * std::cos(t), s * std::sin(t), z};
            total += lat.w[i] * H(x - nu) * f(nu);
        }
    }
    return total * (kTwoPi / nphi);
}

void check_factors(const std::vector<SphereField>& factors) {
    if (factors.size() < 2) throw ValidationError("at least two factors are required");
    for (const auto& f : factors) {
        if (!f.grid()) throw ValidationError("factor without a grid");
        if (!f.grid()->same_as(*factors[0].grid())) throw ValidationError("factors live on different grids");
    }
}

}  // namespace

// ---------------------------------------------------------------- classify

std::string AdmissiblePair::label() const {
    std::ostringstream os;
    os << "(" << d << "," << m << ")";
    return os.str();
}

AdmissiblePair classify(int d, int m) {
    AdmissiblePair p;
    p.d = d;
    p.m = m;
    p.alpha = 0.5 * (d - 1) * (m - 2) - 1.0;
    if (m < 2 || (d == 2 && m < 4))
        p.cls = PairClass::inadmissible;
    else if ((d == 2 && m == 4) || (d == 3 && m == 3) || (d >= 3 && m == 2))
        p.cls = PairClass::boundary;
    else
        p.cls = PairClass::interior;
    return p;
}

// ---------------------------------------------------------------- two-fold

cplx pair_average(const SphereField& h1, const SphereField& h2, const Vec3& y, int extra_points) {
    const int d = h1.dim();
    const double r = norm(y);
    if (r > 2.0) return 0.0;
    if (d == 2) {
        if (r == 0.0) throw NumericalRefusal("pair average undefined at y = 0 for d = 2");
        double h = std::sqrt(std::max(0.0, (1.0 - 0.5 * r) * (1.0 + 0.5 * r)));
        Vec3 yp{-y[1] / r, y[0] / r, 0.0};
        Vec3 x1{0.5 * y[0] + h * yp[0], 0.5 * y[1] + h * yp[1], 0.0};
        Vec3 x2{0.5 * y[0] - h * yp[0], 0.5 * y[1] - h * yp[1], 0.0};
        return 0.5 * (h1(x1) * h2(x2) + h1(x2) * h2(x1));
    }
    if (r == 0.0) {
        const auto& g = *h1.grid();
        cplx acc(0.0);
        for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights()[i] * h1[i] * h2[g.antipode(i)];
        return acc / sphere_area(3);
    }
    int n = h1.degree() + h2.degree() + 1 + extra_points;
    if (!h1.band_limited() || !h2.band_limited()) n += 16;
    const Vec3 u = (1.0 / r) * y;
    Vec3 e1, e2;
    perpendicular_frame(u, e1, e2);
    double rho = std::sqrt(std::max(0.0, (1.0 - 0.5 * r) * (1.0 + 0.5 * r)));
    cplx acc(0.0);
    for (int a = 0; a < n; ++a) {
        double t = kTwoPi * a / n, c = std::cos(t), s = std::sin(t);
        Vec3 nu{0.5 * y[0] + rho * (c * e1[0] + s * e2[0]), 0.5 * y[1] + rho * (c * e1[1] + s * e2[1]),
                0.5 * y[2] + rho * (c * e1[2] + s * e2[2])};
        acc += h1(nu) * h2(y - nu);
    }
    return acc / double(n);
}

PairKernel::PairKernel(const SphereField& h1, const SphereField& h2, int extra_points)
    : h1_(h1), h2_(h2), extra_(extra_points) {
    if (!h1.grid()->same_as(*h2.grid())) throw ValidationError("factors live on different grids");
    if (h1.dim() != 2) return;
    const int N = h1.grid()->resolution();
    auto dense = [&](const SphereField& f, int& K) {
        K = f.degree();
        std::vector<cplx> a(2 * K + 1, 0.0);
        const auto& c = f.coefficients();
        for (int n = -std::min(K, N / 2 - 1); n <= std::min(K, N / 2 - 1); ++n) a[n + K] = c[n + N / 2 - 1];
        if (K == N / 2) a[0] = a[2 * K] = 0.5 * c[N - 1];
        return a;
    };
    int K1 = 0, K2 = 0;
    std::vector<cplx> a = dense(h1, K1), b = dense(h2, K2);
    span_ = K1 + K2;
    table_.assign((2 * span_ + 1) * (span_ + 1), 0.0);
    for (int n = -K1; n <= K1; ++n)
        for (int k = -K2; k <= K2; ++k)
            table_[(n + k + span_) * (span_ + 1) + std::abs(n - k)] += a[n + K1] * b[k + K2];
}

cplx PairKernel::operator()(const Vec3& y) const {
    if (h1_.dim() != 2) return pair_average(h1_, h2_, y, extra_);
    const double r = std::hypot(y[0], y[1]);
    if (r > 2.0) return 0.0;
    if (r == 0.0) throw NumericalRefusal("pair average undefined at y = 0 for d = 2");
    const int S = span_;
    double T[64];
    std::vector<double> Tbig;
    double* Tp = T;
    if (S + 1 > 64) {
        Tbig.resize(S + 1);
        Tp = Tbig.data();
    }
    const double t = 0.5 * r;
    Tp[0] = 1.0;
    if (S >= 1) Tp[1] = t;
    for (int j = 2; j <= S; ++j) Tp[j] = 2.0 * t * Tp[j - 1] - Tp[j - 2];
    const cplx e(y[0] / r, y[1] / r);
    cplx total(0.0), ep(1.0);
    for (int J = 0; J <= S; ++J) {
        const cplx* rp = &table_[(J + S) * (S + 1)];
        const cplx* rm = &table_[(S - J) * (S + 1)];
        cplx sp(0.0), sm(0.0);
        for (int j = 0; j <= S; ++j) {
            sp += rp[j] * Tp[j];
            if (J > 0) sm += rm[j] * Tp[j];
        }
        total += sp * ep + sm * std::conj(ep);
        ep *= e;
    }
    return total;
}

double two_fold_constant(int d, double r) {
    if (r <= 0.0 || (d == 2 && r == 2.0)) return INFINITY;
    if (r >= 2.0) return 0.0;
    double omega = sphere_area(d - 1);
    return omega / std::pow(2.0, d - 3) / r * std::pow((2.0 - r) * (2.0 + r), 0.5 * (d - 3));
}

cplx two_fold_density(const SphereField& h1, const SphereField& h2, const Vec3& x) {
    if (!h1.grid()->same_as(*h2.grid())) throw ValidationError("factors live on different grids");
    const int d = h1.dim();
    const double r = norm(x);
    if (r < kSingularOffset) throw NumericalRefusal("two-fold density is singular at x = 0");
    if (d == 2 && std::abs(r - 2.0) < kSingularOffset) throw NumericalRefusal("two-fold density is singular at |x| = 2");
    if (r > 2.0) return 0.0;
    cplx u = pair_average(h1, h2, x);
    if (d == 3) return u * (kTwoPi / r);
    return u * (4.0 / (r * std::sqrt((2.0 - r) * (2.0 + r))));
}

std::vector<double> singular_radii(int d, int j) {
    if (d == 2 && j == 2) return {0.0, 2.0};
    if (d == 2 && j == 3) return {1.0};
    if (d == 2 && j == 4) return {0.0};
    if (d == 3 && j == 2) return {0.0};
    return {};
}

std::vector<double> kink_radii(int d, int j) {
    std::vector<double> out;
    if (j == 2) return {2.0};
    if (d == 2 && j == 3) return {1.0, 3.0};
    for (int i = 0; j - 2 * i > 0; ++i) out.push_back(double(j - 2 * i));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------- ConvDensity

ConvDensity::ConvDensity(std::vector<SphereField> factors, int refine) : factors_(std::move(factors)), refine_(refine) {
    check_factors(factors_);
    dim_ = factors_[0].dim();
    degree_sum_.assign(factors_.size() + 1, 0);
    for (std::size_t i = 0; i < factors_.size(); ++i) degree_sum_[i + 1] = degree_sum_[i] + factors_[i].degree();
    singular_ = sconv::singular_radii(dim_, order());
    first_pair_ = PairKernel(factors_[0], factors_[1], 2 * refine_);
    if (dim_ == 2 && order() >= 4) second_pair_ = PairKernel(factors_[2], factors_[3], 2 * refine_);
}

cplx ConvDensity::operator()(const Vec3& x) const {
    double R = norm(x);
    if (dim_ == 2 && x[2] != 0.0) throw ValidationError("points must lie in the plane for d = 2");
    if (R > support_radius()) return 0.0;
    for (double s : singular_)
        if (std::abs(R - s) < kSingularOffset)
            throw NumericalRefusal("point lies within the singular offset of |x| = " + std::to_string(s));
    return prefix(order(), x);
}

std::pair<cplx, double> ConvDensity::with_error(const Vec3& x) const {
    cplx v = (*this)(x);
    cplx w = refined(1)(x);
    return {v, std::abs(w - v)};
}

cplx ConvDensity::reduced_prefix(int j, const Vec3& y) const {
    double r = norm(y);
    if (r >= double(j)) return 0.0;
    if (j == 2) {
        if (r >= 2.0) return 0.0;
        cplx u = first_pair_(y);
        if (dim_ == 3) return kTwoPi * u;
        return u * (4.0 / std::sqrt((2.0 - r) * (2.0 + r)));
    }
    return r * prefix(j, y);
}

cplx ConvDensity::prefix(int j, const Vec3& x) const {
    if (j < 2 || j > order()) throw ValidationError("prefix length out of range");
    const double R = norm(x);
    if (R >= double(j)) return 0.0;
    if (j == 2) {
        if (R >= 2.0) return 0.0;
        cplx u = first_pair_(x);
        if (dim_ == 3) return u * (kTwoPi / R);
        return u * (4.0 / (R * std::sqrt((2.0 - R) * (2.0 + R))));
    }
    if (dim_ == 2 && j == 4) {
        return bipolar_integral(
            x, [&](const Vec3& y, const Vec3& z) { return first_pair_(y) * second_pair_(z); }, 0.0, 2.0, refine_);
    }
    const SphereField& f = factors_[j - 1];
    const int degree = degree_sum_[j];
    if (R < 1e-7) {
        return direct_integral(
            x, dim_, degree, [&](const Vec3& y) { return prefix(j - 1, y); }, f);
    }
    auto nodes = radial_nodes(R, double(j - 1), kink_radii(dim_, j - 1), deep_radii(dim_, j - 1),
                              radial_points(degree, refine_), refine_);
    int npsi = degree + 1 + 2 * refine_;
    return outer_integral(
        x, dim_, nodes, npsi, [&](const Vec3& y, std::size_t) { return reduced_prefix(j - 1, y); }, f);
}

// ---------------------------------------------------------------- operators

SphereField m_operator(const std::vector<SphereField>& factors, int refine) {
    check_factors(factors);
    const int d = factors[0].dim();
    const int m = int(factors.size()) - 1;
    AdmissiblePair pair = classify(d, m);
    if (!pair.admissible()) throw NumericalRefusal("inadmissible " + pair.label());

    const GridPtr& grid = factors[0].grid();
    const int k = m + 1, j = k - 1;
    ConvDensity inner(std::vector<SphereField>(factors.begin(), factors.end() - 1), refine);
    const SphereField& last = factors.back();
    int dprime = 0;
    for (int i = 0; i < j; ++i) dprime += factors[i].degree();
    const int total = dprime + last.degree();

    auto nodes = radial_nodes(1.0, double(j), kink_radii(d, j), deep_radii(d, j), radial_points(total, refine), refine);

    // Reduced inner density at every radial node, tabulated over directions.
    std::vector<cplx> radial(nodes.size());
    std::vector<SphereField> tables;
    auto reduced_at = [&](const Vec3& y) { return inner.reduced_prefix(j, y); };
    if (dprime == 0) {
        parallel_for(nodes.size(), [&](std::size_t q) { radial[q] = reduced_at({nodes[q].r, 0.0, 0.0}); });
    } else {
        int res = d == 3 ? std::max(8, dprime + 1) : std::max(8, 2 * dprime + 2);
        if (d == 2 && res % 2) ++res;
        GridPtr tg = SphereGrid::make(d, res);
        std::vector<std::vector<cplx>> vals(nodes.size(), std::vector<cplx>(tg->size()));
        parallel_for(nodes.size() * tg->size(), [&](std::size_t idx) {
            std::size_t q = idx / tg->size(), p = idx % tg->size();
            vals[q][p] = reduced_at(nodes[q].r * tg->node(p));
        });
        tables.reserve(nodes.size());
        for (auto& v : vals) tables.emplace_back(tg, std::move(v));
    }

    std::vector<cplx> out(grid->size());
    if (dprime == 0 && last.band_limited()) {
        const int L = last.degree();
        const auto& c = last.coefficients();
        if (d == 3) {
            std::vector<double> mu(L + 1, 0.0), pl(L + 1);
            std::vector<cplx> mu_c(L + 1, 0.0);
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                double x = 1.0 - 0.5 * nodes[q].r * nodes[q].r;
                legendre_polynomials(L, x, pl.data());
                for (int l = 0; l <= L; ++l) mu_c[l] += nodes[q].w * radial[q] * kTwoPi * pl[l];
            }
            std::vector<cplx> coeffs(sh_count(L));
            for (int l = 0; l <= L; ++l)
                for (int mm = -l; mm <= l; ++mm) coeffs[sh_index(l, mm)] = mu_c[l] * c[sh_index(l, mm)];
            parallel_for(grid->size(), [&](std::size_t i) { out[i] = sh_synthesize(coeffs.data(), L, grid->node(i)); });
        } else {
            const int N = grid->resolution();
            std::vector<cplx> mu(N / 2 + 1, 0.0);
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const auto& nd = nodes[q];
                double c0 = 1.0 - 0.5 * nd.r * nd.r;
                double s0 = 0.5 * std::sqrt(nd.below * nd.r * nd.above * (2.0 + nd.r));
                double psi = std::atan2(s0, c0);
                for (int n = 0; n <= N / 2; ++n) mu[n] += nd.w * radial[q] * (2.0 * std::cos(n * psi) / s0);
            }
            parallel_for(grid->size(), [&](std::size_t i) {
                const Vec3& p = grid->node(i);
                double th = std::atan2(p[1], p[0]);
                cplx acc(0.0);
                for (int n = -N / 2 + 1; n < N / 2; ++n) {
                    cplx cn = c[n + N / 2 - 1];
                    if (cn != 0.0) acc += mu[std::abs(n)] * cn * std::polar(1.0, n * th);
                }
                acc += mu[N / 2] * c[N - 1] * std::cos(0.5 * N * th);
                out[i] = acc;
            });
        }
        return SphereField(grid, std::move(out));
    }

    const int npsi = total + 1 + 2 * refine;
    parallel_for(grid->size(), [&](std::size_t i) {
        const Vec3& w = grid->node(i);
        out[i] = outer_integral(
            w, d, nodes, npsi,
            [&](const Vec3& y, std::size_t q) -> cplx {
                if (dprime == 0) return radial[q];
                double r = norm(y);
                return tables[q]((1.0 / r) * y);
            },
            last);
    });
    return SphereField(grid, std::move(out));
}

SphereField l_operator(const std::vector<SphereField>& phis, const SphereField& g, int refine) {
    std::vector<SphereField> all(phis);
    all.push_back(g);
    return m_operator(all, refine);
}

SphereField k_gamma_apply(const std::function<cplx(const Vec3&)>& H, double support_radius, double gamma,
                          const SphereField& f) {
    const int d = f.dim();
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
    if (d == 2 && gamma >= 1.0) throw NumericalRefusal("gamma = 1 is excluded for d = 2");
    if (!(support_radius > 0.0)) throw ValidationError("support radius must be positive");
    const GridPtr& grid = f.grid();
    double s = std::min(support_radius, 2.0);
    std::vector<double> kinks;
    if (s < 2.0) kinks.push_back(s);
    std::vector<double> deep;
    if (gamma > 0.0) deep.push_back(0.0);
    const int deg = f.band_limited() ? f.degree() : grid->band_limit();
    auto nodes = radial_nodes(1.0, s, kinks, deep, 16 + deg / 2, 0);
    const int npsi = 2 * deg + 17;
    std::vector<cplx> out(grid->size());
    parallel_for(grid->size(), [&](std::size_t i) {
        out[i] = outer_integral(
            grid->node(i), d, nodes, npsi,
            [&](const Vec3& y, std::size_t) -> cplx {
                double r = norm(y);
                cplx h = H(y);
                if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) throw NumericalRefusal("kernel is unbounded");
                return std::pow(r, 1.0 - gamma) * h;
            },
            f);
    });
    return SphereField(grid, std::move(out));
}

void tabulate_csv(const ConvDensity& density, const std::vector<Vec3>& points, std::ostream& out) {
    const int d = density.dim();
    out << (d == 2 ? "x1,x2" : "x1,x2,x3") << ",re,im,err\n";
    std::vector<std::pair<cplx, double>> vals(points.size());
    parallel_for(points.size(), [&](std::size_t i) { vals[i] = density.with_error(points[i]); });
    char buf[256];
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        for (int c = 0; c < d; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,", p[c]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.3e\n", vals[i].first.real(), vals[i].first.imag(), vals[i].second);
        out << buf;
    }
}

}  // namespace sconv
