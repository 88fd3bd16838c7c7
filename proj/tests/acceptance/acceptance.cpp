#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sconv/conv.hpp"
#include "sconv/el.hpp"
#include "sconv/functional.hpp"
#include "sconv/oracle.hpp"
#include "sconv/regularity.hpp"

using namespace sconv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;  // 0: no runtime bound
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double max_abs(const SphereField& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

double max_gap(const SphereField& a, const SphereField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// sigma * sigma: 4 / (r sqrt(4 - r^2)) on the circle, 2 pi / r on S^2.
double pair_density(int d, double r) { return d == 2 ? 4.0 / (r * std::sqrt(4.0 - r * r)) : 2.0 * M_PI / r; }

Outcome two_fold_closed_form() {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    int used = 0;
    for (int d : {2, 3}) {
        auto g = SphereGrid::make(d, 8);
        auto one = SphereField::constant(g, 1.0);
        int count = 0;
        while (count < 1000) {
            Vec3 x{u(rng), u(rng), d == 3 ? u(rng) : 0.0};
            double r = norm(x);
            if (r < 1e-3 || r > 2.0 - 1e-3) continue;
            double exact = pair_density(d, r);
            worst = std::max(worst, std::abs(two_fold_density(one, one, x) - exact) / exact);
            ++count;
        }
        used += count;
    }
    return {worst < 1e-10, "max rel err " + fmt("%.2e", worst) + " over " + std::to_string(used) + " points"};
}

Outcome mass_identities() {
    bool ok = true;
    std::string detail;
    for (auto [d, k] : std::vector<std::pair<int, int>>{{2, 2}, {2, 4}, {3, 2}, {3, 3}}) {
        auto g = SphereGrid::make(d, 8);
        ConvDensity D(std::vector<SphereField>(k, SphereField::constant(g, 1.0)));
        CrosscheckRecord r = moment_crosscheck(D, builtin_test_function("one"), 1e-3, 1000000, 1);
        double exact = std::pow(sphere_area(d), k);
        double rel = std::abs(r.quadrature.real() - exact) / exact;
        ok = ok && r.pass && rel < 1e-3;
        detail += "(" + std::to_string(d) + "," + std::to_string(k) + ") rel " + fmt("%.1e", rel) + (r.pass ? " " : " MISMATCH ");
    }
    return {ok, detail};
}

Outcome constant_critical_point() {
    auto g = SphereGrid::make(3, 12);
    auto one = SphereField::constant(g, 1.0);
    SphereField M = m_operator({one, one, one});
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < M.size(); ++i) {
        lo = std::min(lo, M[i].real());
        hi = std::max(hi, M[i].real());
    }
    double spread = (hi - lo) / hi;
    PotentialValue pot = potential_oracle(1.0);
    double m_expected = 2.0 * M_PI * pot.value();
    double m_rel = std::abs(M[0].real() - m_expected) / m_expected;
    // ||sigma * sigma||^2 = int_{B_2} (2pi/|x|)^2 dx = 4pi^2 * 4pi * 2
    double norm2 = 4.0 * M_PI * M_PI * 4.0 * M_PI * 2.0;
    double phi_expected = std::pow(2.0 * M_PI, 3) * norm2 / std::pow(4.0 * M_PI, 2);
    double phi = phi_functional(one, 4).phi;
    double phi_rel = std::abs(phi - phi_expected) / phi_expected;
    ELProblem p(2, {0, 1, 0}, one);
    double res = el_residual(one, p, phi_expected);
    bool ok = spread < 1e-6 && m_rel < 1e-3 && phi_rel < 1e-4 && res < 1e-6 && pot.agrees() &&
              std::abs(m_expected - 8.0 * M_PI * M_PI) < 1e-9;
    return {ok, "spread " + fmt("%.1e", spread) + ", M rel " + fmt("%.1e", m_rel) + ", Phi rel " + fmt("%.1e", phi_rel) +
                    ", residual " + fmt("%.1e", res)};
}

SphereField random_band_limited(const GridPtr& g, int degree, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    std::vector<cplx> c;
    if (g->dim() == 3) {
        for (int i = 0; i < (degree + 1) * (degree + 1); ++i) c.emplace_back(n(rng), n(rng));
        return SphereField::from_function(g, [&](const Vec3& w) {
            cplx s = c[0];
            std::size_t i = 1;
            // monomials up to the degree: w1^a w2^b w3^e with a + b + e <= degree
            for (int a = 0; a <= degree; ++a)
                for (int b = 0; a + b <= degree; ++b)
                    for (int e = 0; a + b + e <= degree; ++e) {
                        if (a + b + e == 0) continue;
                        if (i >= c.size()) return s;
                        s += c[i++] * std::pow(w[0], a) * std::pow(w[1], b) * std::pow(w[2], e);
                    }
            return s;
        });
    }
    for (int i = 0; i < 2 * degree + 1; ++i) c.emplace_back(n(rng), n(rng));
    return SphereField::from_function(g, [&](const Vec3& w) {
        double t = std::atan2(w[1], w[0]);
        cplx s = 0.0;
        for (int k = -degree; k <= degree; ++k) s += c[k + degree] * std::polar(1.0, k * t);
        return s;
    });
}

Outcome equivariance_and_symmetry() {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    double worst_rot = 0.0, worst_perm = 0.0;
    for (auto [d, m, res, deg] : std::vector<std::array<int, 4>>{{3, 2, 16, 2}, {2, 4, 12, 1}}) {
        auto g = SphereGrid::make(d, res);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<SphereField> fs;
            for (int i = 0; i <= m; ++i) fs.push_back(random_band_limited(g, deg, rng));
            SphereField M = m_operator(fs);
            double scale = max_abs(M);
            Mat3 theta = euler_rotation(d, angle(rng), angle(rng), angle(rng));
            std::vector<SphereField> rotated;
            for (const auto& f : fs) rotated.push_back(apply_rotation(theta, f));
            worst_rot = std::max(worst_rot, max_gap(m_operator(rotated), apply_rotation(theta, M)) / scale);
            std::vector<SphereField> perm(fs);
            std::shuffle(perm.begin(), perm.end(), rng);
            worst_perm = std::max(worst_perm, max_gap(m_operator(perm), M) / scale);
        }
    }
    return {worst_rot < 1e-6 && worst_perm < 1e-6,
            "rotation defect " + fmt("%.1e", worst_rot) + ", permutation defect " + fmt("%.1e", worst_perm)};
}

std::string fit_text(const HolderFit& f) {
    return "exponent " + fmt("%.3f", f.exponent) + " (without coarsest " + fmt("%.3f", f.exponent_without_coarsest) +
           (f.unstable ? ", unstable)" : ", stable)");
}

Outcome holder_three_fold() {
    auto g = SphereGrid::make(3, 8);
    auto h = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + 0.5 * w[0]); });
    ConvDensity D({h, h, h});
    HolderFit fit = holder_probe(D, Region{0.0, 3.0}, geometric_ladder(0.5, 6), 200, 1);
    return {fit.exponent >= 0.30 && !fit.unstable, fit_text(fit)};
}

Outcome weighted_holder_four_fold() {
    auto g = SphereGrid::make(2, 8);
    ConvDensity D(std::vector<SphereField>(4, SphereField::constant(g, 1.0)));
    HolderFit fit = weighted_holder_probe(D, 1.0, Region{1e-3, 4.0}, geometric_ladder(0.5, 6), 200, 1);
    return {fit.exponent >= 0.05, fit_text(fit)};
}

Outcome log_singularity() {
    auto g = SphereGrid::make(2, 8);
    ConvDensity D(std::vector<SphereField>(4, SphereField::constant(g, 1.0)));
    LogSingularityRecord r = log_singularity_probe(D, 4);
    return {r.variation() < 3.0, "ratio variation " + fmt("%.3f", r.variation()) + ", slope " + fmt("%.3f", r.slope)};
}

Outcome smallness() {
    std::vector<double> eps;
    for (int k = 1; k <= 8; ++k) eps.push_back(std::ldexp(1.0, -k));
    SmallnessRecord r = smallness_probe(1.0, Vec3{0.8, 0.6, 0.0}, eps);
    bool ok = r.annulus_fit.exponent >= 1.0 / 6.0 - 0.05 && r.ball_fit.exponent >= 0.45;
    return {ok, "annulus " + fmt("%.3f", r.annulus_fit.exponent) + ", ball " + fmt("%.3f", r.ball_fit.exponent)};
}

Outcome difference_equivalence() {
    auto g = SphereGrid::make(3, 16);
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
        for (double s : {0.4, 0.9}) {
            SphereField f = random_field(g, 1 + i, 5, i);
            EquivalenceRecord e = difference_equivalence_check(f, s);
            // first <= C second + 0.1 ||f||
            double margin = e.first_sup - (e.constant * e.second_sup + 0.1 * e.l2);
            worst = std::max(worst, margin);
            if (!(margin <= 0.0)) ++failures;
        }
    return {failures == 0, std::to_string(failures) + " failures of 20, worst margin " + fmt("%.3f", worst)};
}

Outcome closed_form_moduli() {
    auto g = SphereGrid::make(3, 8);
    auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(w[0]); });
    const double base = std::sqrt(4.0 * M_PI / 3.0);
    double worst = 0.0;
    for (int k = 0; k <= 8; ++k) {
        double t = std::ldexp(1.0, -k);
        double one = 2.0 * std::abs(std::sin(t / 2.0)) * base;
        double two = 4.0 * std::pow(std::sin(t / 2.0), 2) * base;
        worst = std::max(worst, std::abs(l2_norm(flow_difference(f, RotationFlow{1, 2, t}, 1)) - one));
        worst = std::max(worst, std::abs(l2_norm(flow_difference(f, RotationFlow{1, 2, t}, 2)) - two));
    }
    return {worst < 1e-6, "max abs err " + fmt("%.1e", worst)};
}

Outcome hemisphere_modulus() {
    auto g = SphereGrid::make(3, 64);
    auto h = SphereField::from_function(g, [](const Vec3& w) { return cplx(w[2] > 0 ? 1.0 : 0.0); });
    NormEstimate e = norm_estimate(h, NormFamily::first, 0.75);
    return {std::abs(e.modulus_exponent - 0.5) <= 0.05,
            "modulus exponent " + fmt("%.3f", e.modulus_exponent) + ", resolved below " + fmt("%.4f", e.resolved_scale)};
}

Outcome smoothing() {
    auto one = [](const Vec3&) { return cplx(1.0); };
    SmoothingRecord a = smoothing_probe({one, one}, 3, 0.2, 16, 50, 1);
    SmoothingRecord b = smoothing_probe({one, one, one, one}, 3, 0.5, 16, 50, 1);
    return {a.growth < 1.5 && b.growth < 1.5,
            "growth (3,2) " + fmt("%.3f", a.growth) + ", (3,4) " + fmt("%.3f", b.growth)};
}

Outcome refinement() {
    auto g = SphereGrid::make(3, 16);
    auto init = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + 0.1 * w[0]); });
    ELProblem p(2, {0, 1, 0}, init, LambdaMode::free, std::nullopt, 200);
    StabilityRecord r = refinement_stability(p, {16, 32, 48}, {0.25, 0.5, 0.75});
    return {r.all_converged && r.max_ratio < 1.3,
            "max ratio " + fmt("%.4f", r.max_ratio) + (r.all_converged ? ", all converged" : ", NOT converged")};
}

std::string run_cli(const std::string& args) {
    std::string cmd = std::string(SCONV_CLI_PATH) + " " + args + " 2>&1";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) return "<popen failed>";
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
    return out;
}

Outcome determinism() {
    const std::vector<std::string> runs{
        "phi --d 3 --q 4 --field const+0.2*linear:2",
        "solve --d 3 --m 2 --flags 010 --init const+0.1*linear:1 --res 10",
        "oracle --d 3 --k 2 --g gauss --samples 20000 --seed 9",
        "holder --d 2 --k 4 --gamma 1 --rmin 0.001 --rmax 4 --pairs 50 --seed 3 --format csv",
        "m-op --d 2 --m 2",
    };
    int identical = 0;
    for (const auto& args : runs) {
        std::string a = run_cli(args), b = run_cli(args);
        if (!a.empty() && a == b) ++identical;
    }
    return {identical == int(runs.size()), std::to_string(identical) + "/" + std::to_string(runs.size()) + " runs byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "closed-form two-fold density", 1.0, two_fold_closed_form},
        {2, "mass identities", 60.0, mass_identities},
        {3, "constant critical point", 30.0, constant_critical_point},
        {4, "rotation equivariance and permutation symmetry of M", 120.0, equivariance_and_symmetry},
        {5, "Hoelder floor of the three-fold density on S^2", 300.0, holder_three_fold},
        {6, "weighted Hoelder floor of the four-fold circle density", 300.0, weighted_holder_four_fold},
        {7, "logarithmic singularity of the four-fold circle density", 120.0, log_singularity},
        {8, "smallness integrals", 300.0, smallness},
        {9, "difference-norm equivalence", 60.0, difference_equivalence},
        {10, "closed-form flow moduli", 10.0, closed_form_moduli},
        {11, "hemisphere modulus exponent", 30.0, hemisphere_modulus},
        {12, "smoothing probes", 600.0, smoothing},
        {13, "refinement stability", 900.0, refinement},
        {14, "CLI determinism", 0.0, determinism},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = c.limit_seconds <= 0.0 || secs <= c.limit_seconds;
        bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::string budget = c.limit_seconds > 0.0 ? fmt(" / %.0f s", c.limit_seconds) : "";
        std::printf("[%s] %2d %s: %s (%.2f s%s%s)\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs,
                    budget.c_str(), in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
