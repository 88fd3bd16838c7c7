#include "sconv/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "sconv/harmonics.hpp"
#include "sconv/oracle.hpp"
#include "sconv/parallel.hpp"

namespace sconv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInterpolationTolerance = 1e-9;

// Ordinary least squares y = a + b x; returns {b, a, rms residual}.
std::array<double, 3> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    double b = sxy / sxx, a = my - b * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - a - b * x[i], 2);
    return {b, a, std::sqrt(rss / n)};
}

// Positive (log scale, log modulus) pairs.
void log_pairs(const std::vector<double>& scales, const std::vector<double>& moduli, std::vector<double>& lx,
               std::vector<double>& ly) {
    lx.clear();
    ly.clear();
    for (std::size_t i = 0; i < scales.size(); ++i)
        if (moduli[i] > 0.0 && scales[i] > 0.0) {
            lx.push_back(std::log(scales[i]));
            ly.push_back(std::log(moduli[i]));
        }
}

Vec3 random_direction(int d, CounterRng& rng) {
    std::normal_distribution<double> normal;
    Vec3 u{0.0, 0.0, 0.0};
    double n2 = 0.0;
    while (n2 == 0.0) {
        n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            u[i] = normal(rng);
            n2 += u[i] * u[i];
        }
    }
    return (1.0 / std::sqrt(n2)) * u;
}

bool near_singular(double r, const std::vector<double>& singular) {
    for (double s : singular)
        if (std::abs(r - s) <= kSingularOffset) return true;
    return false;
}

double rms_value(const SphereField& f) { return l2_norm(f) / std::sqrt(sphere_area(f.dim())); }

std::vector<std::vector<std::pair<int, int>>> compositions(int d, int length) {
    std::vector<std::vector<std::pair<int, int>>> out{{}};
    auto gens = generators(d);
    for (int l = 1; l <= length; ++l) {
        std::vector<std::vector<std::pair<int, int>>> next;
        for (const auto& c : out)
            if (int(c.size()) == l - 1)
                for (const auto& g : gens) {
                    auto e = c;
                    e.push_back(g);
                    next.push_back(e);
                }
        out.insert(out.end(), next.begin(), next.end());
    }
    return out;
}

std::string generator_label(const std::pair<int, int>& g) {
    return "X" + std::to_string(g.first) + std::to_string(g.second);
}

}  // namespace

// ---------------------------------------------------------------- fits

HolderFit fit_power_law(std::vector<double> scales, std::vector<double> moduli, std::size_t pairs) {
    if (scales.size() != moduli.size()) throw ValidationError("scale and modulus counts differ");
    if (scales.size() < 3) throw ValidationError("at least three scales are required");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] < scales[i - 1])) throw ValidationError("scales must be strictly decreasing");
    HolderFit fit;
    fit.scales = std::move(scales);
    fit.moduli = std::move(moduli);
    fit.pairs_per_scale = pairs;
    std::vector<double> lx, ly;
    log_pairs(fit.scales, fit.moduli, lx, ly);
    if (lx.size() < 2) {
        fit.exponent = fit.constant = fit.residual = fit.exponent_without_coarsest = kNaN;
        fit.unstable = true;
        return fit;
    }
    auto [b, a, rms] = least_squares(lx, ly);
    fit.exponent = b;
    fit.constant = std::exp(a);
    fit.residual = rms;
    if (lx.size() >= 3) {
        std::vector<double> lx2(lx.begin() + 1, lx.end()), ly2(ly.begin() + 1, ly.end());
        fit.exponent_without_coarsest = least_squares(lx2, ly2)[0];
    } else {
        fit.exponent_without_coarsest = kNaN;
    }
    fit.unstable = !(std::abs(fit.exponent_without_coarsest - fit.exponent) < 0.05);
    return fit;
}

double HolderFit::refit() const {
    std::vector<double> lx, ly;
    log_pairs(scales, moduli, lx, ly);
    if (lx.size() < 2) return kNaN;
    long double n = lx.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += (long double)lx[i] * lx[i];
        sxy += (long double)lx[i] * ly[i];
    }
    return double((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

json HolderFit::to_json() const {
    return json{{"scales", scales},
                {"moduli", moduli},
                {"pairs_per_scale", pairs_per_scale},
                {"exponent", exponent},
                {"constant", constant},
                {"residual", residual},
                {"exponent_without_coarsest", exponent_without_coarsest},
                {"unstable", unstable}};
}

void HolderFit::write_csv(std::ostream& out) const {
    char buf[96];
    out << "scale,modulus\n";
    for (std::size_t i = 0; i < scales.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", scales[i], moduli[i]);
        out << buf;
    }
}

std::vector<double> geometric_ladder(double r0, int count, double ratio) {
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) out[k] = r0 * std::pow(ratio, k);
    return out;
}

// ---------------------------------------------------------------- Hölder probes

HolderFit holder_probe(const std::function<cplx(const Vec3&)>& H, int d, Region region,
                       const std::vector<double>& ladder, const std::vector<double>& singular, int pairs,
                       std::uint64_t seed, const std::vector<double>& focus) {
    if (d != 2 && d != 3) throw ValidationError("dimension must be 2 or 3");
    if (ladder.size() < 3) throw ValidationError("at least three scales are required");
    if (pairs < 1) throw ValidationError("pairs must be positive");
    if (!(region.r_max > region.r_min) || region.r_min < 0.0) throw ValidationError("empty region");
    for (double s : singular)
        if (s >= region.r_min - kSingularOffset && s <= region.r_max + kSingularOffset)
            throw ValidationError("region intersects the singular offset at |x| = " + std::to_string(s));
    for (std::size_t k = 1; k < ladder.size(); ++k)
        if (!(ladder[k] < ladder[k - 1])) throw ValidationError("scales must be strictly decreasing");
    if (ladder[0] > 2.0 * region.r_max) throw ValidationError("ladder exceeds the region diameter");

    auto inside = [&](const Vec3& p) {
        double r = norm(p);
        return r >= region.r_min && r <= region.r_max && !near_singular(r, singular);
    };
    std::vector<double> shells;
    for (double r : focus)
        if (r >= region.r_min && r <= region.r_max && !near_singular(r, singular)) shells.push_back(r);
    const int focused = shells.empty() ? 0 : pairs / 4;
    std::vector<Vec3> bases(pairs);
    for (int p = 0; p < pairs; ++p) {
        CounterRng rng(seed, std::uint64_t(p));
        if (p < focused) {
            bases[p] = shells[p % shells.size()] * random_direction(d, rng);
            continue;
        }
        std::uniform_real_distribution<double> unif;
        double lo = std::pow(region.r_min, d), hi = std::pow(region.r_max, d);
        Vec3 x;
        do {
            double r = std::pow(lo + unif(rng) * (hi - lo), 1.0 / d);
            x = r * random_direction(d, rng);
        } while (!inside(x));
        bases[p] = x;
    }
    // partner points; valid = 0 marks a pair that could not be placed
    const std::size_t K = ladder.size();
    std::vector<Vec3> partners(K * pairs);
    std::vector<char> valid(K * pairs, 0);
    // one direction per pair, shared by every scale; fresh directions only
    // when the shared one leaves the region
    for (int p = 0; p < pairs; ++p) {
        CounterRng rng(seed ^ 0x5bd1e995ULL, std::uint64_t(p));
        const Vec3& x = bases[p];
        Vec3 radial = (1.0 / norm(x)) * x;
        Vec3 u;
        switch (p < focused ? 1 : p % 3) {
            case 1: u = (p < focused && (p / int(shells.size())) % 2) ? -1.0 * radial : radial; break;
            case 2:
                if (d == 2) {
                    u = {-radial[1], radial[0], 0.0};
                } else {
                    Vec3 e1, e2;
                    perpendicular_frame(radial, e1, e2);
                    Vec3 c = random_direction(2, rng);
                    u = c[0] * e1 + c[1] * e2;
                }
                break;
            default: u = random_direction(d, rng);
        }
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<Vec3> tries{u, -1.0 * u};
            CounterRng extra(seed ^ 0x2545f491ULL, (k + 1) * 1000003ULL + std::uint64_t(p));
            for (int a = 0; a < 16; ++a) tries.push_back(random_direction(d, extra));
            for (const Vec3& v : tries) {
                Vec3 y = x + ladder[k] * v;
                if (inside(y)) {
                    partners[k * pairs + p] = y;
                    valid[k * pairs + p] = 1;
                    break;
                }
            }
        }
    }
    std::vector<cplx> base_values(pairs), partner_values(K * pairs);
    parallel_for(pairs, [&](std::size_t p) { base_values[p] = H(bases[p]); });
    parallel_for(K * pairs, [&](std::size_t i) {
        if (valid[i]) partner_values[i] = H(partners[i]);
    });
    // sup over |x - x'| <= r_k: running max from the finest scale up
    std::vector<double> moduli(K, 0.0);
    double running = 0.0;
    for (std::size_t kk = K; kk-- > 0;) {
        for (int p = 0; p < pairs; ++p)
            if (valid[kk * pairs + p]) running = std::max(running, std::abs(partner_values[kk * pairs + p] - base_values[p]));
        moduli[kk] = running;
    }
    return fit_power_law(ladder, moduli, std::size_t(pairs));
}

namespace {

std::vector<double> non_smooth_radii(const ConvDensity& density) {
    std::vector<double> out = kink_radii(density.dim(), density.order());
    out.push_back(density.support_radius());
    return out;
}

}  // namespace

HolderFit holder_probe(const ConvDensity& density, Region region, const std::vector<double>& ladder, int pairs,
                       std::uint64_t seed) {
    return holder_probe([&](const Vec3& x) { return density(x); }, density.dim(), region, ladder,
                        density.singular_radii(), pairs, seed, non_smooth_radii(density));
}

HolderFit weighted_holder_probe(const ConvDensity& density, double gamma, Region region,
                                const std::vector<double>& ladder, int pairs, std::uint64_t seed) {
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    return holder_probe(
        [&](const Vec3& x) {
            double r = norm(x);
            return r == 0.0 ? cplx(0.0) : std::pow(r, gamma) * density(x);
        },
        density.dim(), region, ladder, density.singular_radii(), pairs, seed, non_smooth_radii(density));
}

// ---------------------------------------------------------------- log singularity

json LogSingularityRecord::to_json() const {
    return json{{"radii", radii},         {"values", values},       {"ratios", ratios},
                {"slope", slope},         {"intercept", intercept}, {"max_ratio", max_ratio},
                {"min_ratio", min_ratio}, {"variation", variation()}};
}

LogSingularityRecord log_singularity_probe(const ConvDensity& density, int kmax) {
    if (density.dim() != 2 || density.order() != 4) throw ValidationError("the log probe needs a four-fold circle density");
    if (kmax < 2) throw ValidationError("need at least two radii");
    LogSingularityRecord rec;
    const Vec3 u{std::cos(0.3), std::sin(0.3), 0.0};
    std::vector<double> logs;
    for (int k = 1; k <= kmax; ++k) {
        double r = std::pow(10.0, -k);
        double v = density(r * u).real();
        if (!std::isfinite(v)) throw NumericalRefusal("evaluation failed at |x| = " + std::to_string(r));
        rec.radii.push_back(r);
        rec.values.push_back(v);
        rec.ratios.push_back(v / (1.0 + std::abs(std::log(r))));
        logs.push_back(-std::log(r));
    }
    auto [b, a, rms] = least_squares(logs, rec.values);
    (void)rms;
    rec.slope = b;
    rec.intercept = a;
    rec.max_ratio = *std::max_element(rec.ratios.begin(), rec.ratios.end());
    rec.min_ratio = *std::min_element(rec.ratios.begin(), rec.ratios.end());
    return rec;
}

// ---------------------------------------------------------------- smallness

json SmallnessRecord::to_json() const {
    return json{{"gamma", gamma},
                {"s", s},
                {"x", {x[0], x[1]}},
                {"epsilons", epsilons},
                {"annulus", annulus},
                {"ball", ball},
                {"annulus_fit", annulus_fit.to_json()},
                {"ball_fit", ball_fit.to_json()},
                {"annulus_bound", annulus_bound},
                {"ball_bound", ball_bound},
                {"monotone", monotone}};
}

SmallnessRecord smallness_probe(double gamma, const Vec3& x, const std::vector<double>& epsilons, double s, int refine) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
    const double R = std::hypot(x[0], x[1]);
    if (R == 0.0) throw ValidationError("x must be nonzero");
    if (R >= 4.0) throw ValidationError("x must lie in B_4");
    if (epsilons.size() < 3) throw ValidationError("at least three epsilons are required");
    SmallnessRecord rec;
    rec.gamma = gamma;
    rec.s = s;
    rec.x = {x[0], x[1], 0.0};
    rec.epsilons = epsilons;
    std::sort(rec.epsilons.begin(), rec.epsilons.end(), std::greater<>());
    for (double e : rec.epsilons)
        if (!(e > 0.0 && e < 1.0)) throw ValidationError("epsilons must lie in (0, 1)");
    const std::size_t n = rec.epsilons.size();
    rec.annulus.assign(n, 0.0);
    rec.ball.assign(n, 0.0);
    const double w = std::pow(R, gamma);
    auto one = [](const Vec3&, const Vec3&) { return cplx(1.0); };
    parallel_for(2 * n, [&](std::size_t i) {
        double e = rec.epsilons[i % n];
        if (i < n)
            rec.annulus[i] = w * bipolar_integral(rec.x, one, 2.0 - e, 2.0, refine).real();
        else
            rec.ball[i - n] = w * bipolar_integral(rec.x, one, 0.0, e, refine).real();
    });
    for (std::size_t i = 1; i < n; ++i)
        if (rec.annulus[i] > rec.annulus[i - 1] || rec.ball[i] > rec.ball[i - 1]) rec.monotone = false;
    rec.annulus_fit = fit_power_law(rec.epsilons, rec.annulus);
    rec.ball_fit = fit_power_law(rec.epsilons, rec.ball);
    rec.annulus_bound = std::min(1.0 / 6.0, gamma / (2.0 * (gamma + 1.0)) - s);
    rec.ball_bound = std::min(0.5, gamma - s);
    return rec;
}

// ---------------------------------------------------------------- norms

NormFamily parse_norm_family(const std::string& s) {
    if (s == "first") return NormFamily::first;
    if (s == "second") return NormFamily::second;
    if (s == "integer") return NormFamily::integer;
    throw ValidationError("norm family must be first, second or integer");
}

std::string to_string(NormFamily family) {
    switch (family) {
        case NormFamily::first: return "first";
        case NormFamily::second: return "second";
        default: return "integer";
    }
}

json NormEstimate::to_json() const {
    return json{{"family", sconv::to_string(family)},
                {"s", s},
                {"ladder", ladder},
                {"labels", labels},
                {"differences", differences},
                {"suprema", suprema},
                {"l2", l2},
                {"total", total},
                {"noise_floor", noise_floor},
                {"modulus_exponent", modulus_exponent},
                {"resolved_scale", resolved_scale},
                {"rough", rough}};
}

NormEstimate norm_estimate(const SphereField& f, NormFamily family, double s, int kmax) {
    if (kmax < 0) throw ValidationError("ladder length must be non-negative");
    const bool integral_s = s == std::floor(s);
    switch (family) {
        case NormFamily::first:
            if (!(s >= 0.0 && s < 3.0) || (integral_s && s != 0.0))
                throw ValidationError("first-difference norms need s = 0 or non-integer s in (0, 3)");
            break;
        case NormFamily::second:
            if (!(s >= 0.0 && s < 2.0)) throw ValidationError("second-difference norms need s in [0, 2)");
            break;
        case NormFamily::integer:
            if (!(integral_s && s >= 0.0 && s <= 3.0)) throw ValidationError("integer norms need s in {0, 1, 2, 3}");
            break;
    }
    NormEstimate est;
    est.family = family;
    est.s = s;
    est.l2 = l2_norm(f);
    est.total = est.l2;
    est.noise_floor = kInterpolationTolerance * std::sqrt(double(f.size())) * rms_value(f);
    for (int k = 0; k <= kmax; ++k) est.ladder.push_back(std::ldexp(1.0, -k));
    if (s == 0.0) return est;
    const int d = f.dim();
    if (family == NormFamily::integer) {
        for (const auto& g : generators(d)) {
            SphereField y = f;
            for (int i = 0; i < int(s); ++i) y = flow_derivative(y, g.first, g.second);
            est.labels.push_back(generator_label(g) + "^" + std::to_string(int(s)));
            est.differences.push_back({});
            est.suprema.push_back(l2_norm(y));
            est.total += est.suprema.back();
        }
        return est;
    }
    const int k = family == NormFamily::first ? int(std::floor(s)) : 0;
    const double alpha = s - k;
    const int order = family == NormFamily::first ? 1 : 2;
    std::vector<std::pair<std::string, SphereField>> ys;
    for (const auto& c : compositions(d, k)) {
        SphereField y = f;
        std::string label;
        for (auto it = c.rbegin(); it != c.rend(); ++it) y = flow_derivative(y, it->first, it->second);
        for (const auto& g : c) label += generator_label(g);
        ys.emplace_back(label, y);
    }
    auto gens = generators(d);
    const std::size_t rows = ys.size() * gens.size(), cols = est.ladder.size();
    std::vector<double> diffs(rows * cols);
    parallel_for(rows * cols, [&](std::size_t idx) {
        std::size_t row = idx / cols, col = idx % cols;
        const auto& g = gens[row % gens.size()];
        const SphereField& y = ys[row / gens.size()].second;
        diffs[idx] = l2_norm(flow_difference(y, RotationFlow{g.first, g.second, est.ladder[col]}, order));
    });
    for (std::size_t row = 0; row < rows; ++row) {
        const auto& g = gens[row % gens.size()];
        const std::string& ylabel = ys[row / gens.size()].first;
        est.labels.push_back((ylabel.empty() ? std::string() : ylabel + ":") + generator_label(g));
        std::vector<double> d_row(diffs.begin() + row * cols, diffs.begin() + (row + 1) * cols);
        double sup = 0.0;
        for (std::size_t c = 0; c < cols; ++c)
            if (d_row[c] > est.noise_floor) sup = std::max(sup, std::pow(est.ladder[c], -alpha) * d_row[c]);
        est.differences.push_back(d_row);
        est.suprema.push_back(sup);
        est.total += sup;
    }
    // modulus exponent of the undifferentiated field over resolved scales
    est.resolved_scale = std::min(0.25, 4.0 / (f.degree() + 1));
    std::vector<double> sc, mod;
    for (std::size_t c = 0; c < cols; ++c) {
        if (est.ladder[c] < est.resolved_scale) break;
        double m = 0.0;
        for (std::size_t g = 0; g < gens.size(); ++g) m = std::max(m, est.differences[g][c]);
        sc.push_back(est.ladder[c]);
        mod.push_back(m > est.noise_floor ? m : 0.0);
    }
    if (sc.size() >= 3) {
        HolderFit fit = fit_power_law(sc, mod);
        est.modulus_exponent = fit.exponent;
        est.rough = std::isfinite(fit.exponent) && fit.exponent < alpha - 0.05;
    } else {
        est.modulus_exponent = kNaN;
    }
    return est;
}

json EquivalenceRecord::to_json() const {
    return json{{"s", s},         {"first_sup", first_sup}, {"second_sup", second_sup}, {"ratio", ratio},
                {"constant", constant}, {"l2", l2},         {"holds", holds}};
}

EquivalenceRecord difference_equivalence_check(const SphereField& f, double s, int kmax) {
    if (!(s > 0.0 && s < 1.0)) throw ValidationError("the equivalence check needs s in (0, 1)");
    NormEstimate first = norm_estimate(f, NormFamily::first, s, kmax);
    NormEstimate second = norm_estimate(f, NormFamily::second, s, kmax);
    EquivalenceRecord rec;
    rec.s = s;
    rec.l2 = first.l2;
    rec.constant = 1.0 / (2.0 * (1.0 - std::pow(2.0, -(1.0 - s))));
    rec.holds = true;
    for (std::size_t g = 0; g < first.suprema.size(); ++g) {
        rec.first_sup = std::max(rec.first_sup, first.suprema[g]);
        rec.second_sup = std::max(rec.second_sup, second.suprema[g]);
        if (first.suprema[g] > rec.constant * second.suprema[g] + 0.1 * rec.l2) rec.holds = false;
    }
    rec.ratio = rec.second_sup > 0.0 ? rec.first_sup / rec.second_sup : 0.0;
    return rec;
}

// ---------------------------------------------------------------- smoothing

SphereField random_field(const GridPtr& grid, int degree, std::uint64_t seed, std::uint64_t stream) {
    if (degree < 0 || degree > grid->band_limit()) throw ValidationError("degree outside the grid band limit");
    auto coefficient = [&](std::uint64_t index) {
        CounterRng rng(seed, (stream << 32) + index);
        std::normal_distribution<double> normal;
        double re = normal(rng), im = normal(rng);
        return cplx(re, im) / std::sqrt(2.0);
    };
    std::vector<cplx> values(grid->size());
    if (grid->dim() == 3) {
        std::vector<cplx> c(sh_count(degree));
        for (int l = 0; l <= degree; ++l)
            for (int m = -l; m <= l; ++m) c[sh_index(l, m)] = coefficient(std::uint64_t(sh_index(l, m)));
        parallel_for(grid->size(), [&](std::size_t i) { values[i] = sh_synthesize(c.data(), degree, grid->node(i)); });
    } else {
        std::vector<cplx> c(2 * degree + 1);
        for (int n = -degree; n <= degree; ++n) c[n + degree] = coefficient(std::uint64_t(n + (1 << 20)));
        for (std::size_t i = 0; i < grid->size(); ++i) {
            double t = std::atan2(grid->node(i)[1], grid->node(i)[0]);
            cplx acc(0.0);
            for (int n = -degree; n <= degree; ++n) acc += c[n + degree] * std::polar(1.0, n * t);
            values[i] = acc;
        }
    }
    SphereField f(grid, std::move(values));
    double n = l2_norm(f);
    return n > 0.0 ? f.scaled(1.0 / n) : f;
}

json SmoothingRecord::to_json() const {
    return json{{"d", d},           {"m", m},          {"s", s},           {"resolutions", resolutions},
                {"max_gain", max_gain}, {"growth", growth}, {"samples", samples}};
}

SmoothingRecord smoothing_probe(const std::vector<std::function<cplx(const Vec3&)>>& phis, int d, double s,
                                int resolution, int samples, std::uint64_t seed) {
    const int m = int(phis.size());
    AdmissiblePair pair = classify(d, m);
    if (!pair.admissible()) throw NumericalRefusal("inadmissible " + pair.label());
    if (pair.cls == PairClass::interior && s > pair.alpha)
        throw ValidationError("s exceeds the smoothing order of an interior pair");
    if (!(s > 0.0 && s < 1.0)) throw ValidationError("the smoothing probe needs s in (0, 1)");
    if (samples < 1) throw ValidationError("samples must be positive");
    SmoothingRecord rec;
    rec.d = d;
    rec.m = m;
    rec.s = s;
    rec.samples = std::size_t(samples);
    for (int res : {resolution, 2 * resolution}) {
        GridPtr grid = SphereGrid::make(d, res);
        std::vector<SphereField> phi_fields;
        for (const auto& p : phis) phi_fields.push_back(SphereField::from_function(grid, p));
        double best = 0.0;
        for (int i = 0; i < samples; ++i) {
            SphereField g = random_field(grid, grid->band_limit(), seed, std::uint64_t(i));
            if (!(l2_norm(g) > 0.0)) continue;
            SphereField Lg = l_operator(phi_fields, g);
            best = std::max(best, norm_estimate(Lg, NormFamily::first, s).total);
        }
        rec.resolutions.push_back(res);
        rec.max_gain.push_back(best);
    }
    rec.growth = rec.max_gain[0] > 0.0 ? rec.max_gain[1] / rec.max_gain[0] : 0.0;
    return rec;
}

// ---------------------------------------------------------------- refinement

json StabilityRecord::to_json() const {
    json conv = json::array();
    for (bool c : converged) conv.push_back(c);
    return json{{"resolutions", resolutions}, {"s_values", s_values}, {"converged", conv},
                {"iterations", iterations},   {"residuals", residuals}, {"estimates", estimates},
                {"ratios", ratios},           {"max_ratio", max_ratio}, {"all_converged", all_converged}};
}

StabilityRecord refinement_stability(const ELProblem& base, const std::vector<int>& resolutions,
                                     const std::vector<double>& s_values) {
    if (resolutions.size() < 2) throw ValidationError("need at least two resolutions");
    StabilityRecord rec;
    rec.resolutions = resolutions;
    rec.s_values = s_values;
    for (int res : resolutions) {
        GridPtr grid = SphereGrid::make(base.dim(), res);
        SphereField init = SphereField::from_function(grid, [&](const Vec3& p) { return base.init()(p); });
        std::optional<SphereField> weight;
        if (base.weight())
            weight = SphereField::from_function(grid, [&](const Vec3& p) { return (*base.weight())(p); });
        ELProblem p(base.m(), base.flags(), init, base.mode(), weight, base.max_iter(), base.tol(), base.refine());
        ELReport rep = solve(p);
        rec.converged.push_back(rep.converged);
        rec.iterations.push_back(rep.iterations);
        rec.residuals.push_back(rep.final_residual);
        if (!rep.converged) rec.all_converged = false;
        std::vector<double> row;
        for (double s : s_values) {
            NormEstimate e = norm_estimate(rep.field, NormFamily::first, s);
            row.push_back(e.total / e.l2);
        }
        rec.estimates.push_back(row);
    }
    for (std::size_t i = 1; i < rec.estimates.size(); ++i) {
        std::vector<double> r;
        for (std::size_t j = 0; j < s_values.size(); ++j) {
            r.push_back(rec.estimates[i][j] / rec.estimates[i - 1][j]);
            rec.max_ratio = std::max(rec.max_ratio, r.back());
        }
        rec.ratios.push_back(r);
    }
    return rec;
}

}  // namespace sconv
