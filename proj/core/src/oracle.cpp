#include "sconv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "sconv/parallel.hpp"
#include "sconv/quadrature.hpp"

namespace sconv {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index) : key_(splitmix64(splitmix64(seed) ^ index)) {}

CounterRng::result_type CounterRng::operator()() { return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

TestFunction builtin_test_function(const std::string& name) {
    if (name == "one") return {name, [](const double*, int) { return cplx(1.0); }};
    if (name == "x1") return {name, [](const double* x, int) { return cplx(x[0]); }};
    auto r2 = [](const double* x, int d) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += x[i] * x[i];
        return s;
    };
    if (name == "r2") return {name, [r2](const double* x, int d) { return cplx(r2(x, d)); }};
    if (name == "gauss") return {name, [r2](const double* x, int d) { return cplx(std::exp(-r2(x, d))); }};
    throw ValidationError("unknown test function '" + name + "'");
}

std::vector<std::string> builtin_test_function_names() { return {"one", "x1", "r2", "gauss"}; }

json MCEstimate::to_json() const {
    return json{{"re", estimate.real()}, {"im", estimate.imag()}, {"stderr", std_error}, {"samples", samples}};
}

namespace {

constexpr std::size_t kBlock = 4096;

struct Moments {
    cplx sum;
    double sq = 0.0;
};

Moments pairwise(const std::vector<Moments>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    Moments a = pairwise(v, lo, mid), b = pairwise(v, mid, hi);
    return {a.sum + b.sum, a.sq + b.sq};
}

}  // namespace

MCEstimate mc_moment(int d, int k, const std::function<cplx(int j, const double* nu)>& factor, const TestFunction& g,
                     std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw ValidationError("at least one sample is required");
    if (samples < 10000) throw ValidationError("Monte Carlo moments need at least 10^4 samples");
    if (d < 2 || k < 1) throw ValidationError("need d >= 2 and k >= 1");
    const double scale = std::pow(sphere_area(d), k);
    const std::size_t blocks = (samples + kBlock - 1) / kBlock;
    std::vector<Moments> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        std::vector<double> nu(d), x(d);
        Moments acc;
        std::size_t end = std::min(samples, (b + 1) * kBlock);
        for (std::size_t s = b * kBlock; s < end; ++s) {
            CounterRng rng(seed, s);
            std::fill(x.begin(), x.end(), 0.0);
            cplx weight(1.0);
            for (int j = 0; j < k; ++j) {
                double n2;
                do {
                    n2 = 0.0;
                    for (int i = 0; i < d; ++i) {
                        std::normal_distribution<double> normal;
                        nu[i] = normal(rng);
                        n2 += nu[i] * nu[i];
                    }
                } while (n2 == 0.0);
                double inv = 1.0 / std::sqrt(n2);
                for (int i = 0; i < d; ++i) {
                    nu[i] *= inv;
                    x[i] += nu[i];
                }
                weight *= factor(j, nu.data());
            }
            cplx v = scale * weight * g.eval(x.data(), d);
            acc.sum += v;
            acc.sq += std::norm(v);
        }
        partial[b] = acc;
    });
    Moments total = pairwise(partial, 0, blocks);
    const double n = double(samples);
    MCEstimate out;
    out.samples = samples;
    out.estimate = total.sum / n;
    double var = (total.sq - n * std::norm(out.estimate)) / (n - 1.0);
    out.std_error = std::sqrt(std::max(0.0, var) / n);
    return out;
}

MCEstimate mc_moment(const std::vector<SphereField>& factors, const TestFunction& g, std::size_t samples,
                     std::uint64_t seed) {
    if (factors.empty()) throw ValidationError("at least one factor is required");
    const int d = factors[0].dim();
    for (const auto& f : factors)
        if (f.dim() != d) throw ValidationError("factors of different dimensions");
    return mc_moment(
        d, int(factors.size()),
        [&](int j, const double* nu) { return factors[j](Vec3{nu[0], nu[1], d == 3 ? nu[2] : 0.0}); }, g, samples,
        seed);
}

PotentialValue potential_oracle(double r) {
    if (!(r >= 0.0)) throw ValidationError("radius must be non-negative");
    PotentialValue v;
    v.closed_form = r <= 1.0 ? 4.0 * M_PI : 4.0 * M_PI / r;
    // 2 pi int_{-1}^{1} dt / sqrt(1 + r^2 - 2 r t)
    auto integrand = [](double t, void* p) {
        double rr = *static_cast<double*>(p);
        double q = (1.0 - rr) * (1.0 - rr) + 2.0 * rr * (1.0 - t);
        return 2.0 * M_PI / std::sqrt(q);
    };
    gsl_function F;
    F.function = +integrand;
    F.params = &r;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
    double result = 0.0, abserr = 0.0;
    gsl_set_error_handler_off();
    gsl_integration_qags(&F, -1.0, 1.0, 0.0, 1e-12, 200, ws, &result, &abserr);
    gsl_integration_workspace_free(ws);
    v.quadrature = result;
    return v;
}

cplx density_pairing(const ConvDensity& density, const TestFunction& g) {
    const int d = density.dim(), k = density.order();
    int D = 0;
    for (const auto& f : density.factors()) D += f.degree();
    // radial rule on [0, k] with breaks at every non-smooth radius
    std::vector<double> breaks{0.0, double(k)};
    for (double r : kink_radii(d, k)) breaks.push_back(r);
    for (double r : density.singular_radii()) breaks.push_back(r);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    Rule radial = edge_rule(breaks, 12 + 4 * density.refine(), 8);
    GridPtr ang = SphereGrid::make(d, d == 2 ? std::max(8, 2 * (D + 2) + 2) : std::max(8, (D + 2) / 2 + 2));
    std::vector<cplx> shell(radial.size());
    parallel_for(radial.size(), [&](std::size_t i) {
        double r = radial.x[i];
        cplx acc(0.0);
        for (std::size_t a = 0; a < ang->size(); ++a) {
            Vec3 x = r * ang->node(a);
            acc += ang->weights()[a] * density.prefix(k, x) * g.eval(x.data(), d);
        }
        shell[i] = radial.w[i] * std::pow(r, d - 1) * acc;
    });
    cplx total(0.0);
    for (const cplx& v : shell) total += v;
    return total;
}

json CrosscheckRecord::to_json() const {
    return json{{"quadrature", {quadrature.real(), quadrature.imag()}},
                {"monte_carlo", {monte_carlo.real(), monte_carlo.imag()}},
                {"stderr", std_error},
                {"delta", delta},
                {"allowed", allowed},
                {"pass", pass}};
}

CrosscheckRecord moment_crosscheck(const ConvDensity& density, const TestFunction& g, double tol,
                                   std::size_t samples, std::uint64_t seed) {
    CrosscheckRecord rec;
    rec.quadrature = density_pairing(density, g);
    MCEstimate mc = mc_moment(density.factors(), g, samples, seed);
    rec.monte_carlo = mc.estimate;
    rec.std_error = mc.std_error;
    rec.delta = std::abs(rec.quadrature - rec.monte_carlo);
    rec.allowed = std::max(tol * std::abs(rec.monte_carlo), 3.0 * mc.std_error);
    rec.pass = rec.delta <= rec.allowed;
    return rec;
}

}  // namespace sconv
