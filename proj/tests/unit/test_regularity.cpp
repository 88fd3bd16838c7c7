#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sconv/regularity.hpp"

using namespace sconv;

TEST_CASE("power-law fit recovers exact data") {
    std::vector<double> s, m;
    for (int k = 0; k < 6; ++k) {
        s.push_back(std::ldexp(1.0, -k));
        m.push_back(3.0 * std::pow(s.back(), 0.7));
    }
    HolderFit fit = fit_power_law(s, m);
    CHECK(fit.exponent == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(fit.constant == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.residual < 1e-12);
    CHECK_FALSE(fit.unstable);
    CHECK(fit.refit() == doctest::Approx(fit.exponent).epsilon(1e-12));
    std::ostringstream csv;
    fit.write_csv(csv);
    CHECK(csv.str().rfind("scale,modulus\n", 0) == 0);
}

TEST_CASE("geometric ladder") {
    auto l = geometric_ladder(0.5, 4);
    REQUIRE(l.size() == 4);
    CHECK(l[3] == doctest::Approx(0.0625));
}

TEST_CASE("probe recovers the exponent of a square-root cusp") {
    auto H = [](const Vec3& x) { return cplx(std::sqrt(std::abs(norm(x) - 1.0))); };
    HolderFit fit = holder_probe(H, 3, Region{0.5, 1.5}, geometric_ladder(0.25, 6), {}, 200, 3, {1.0});
    CHECK(fit.exponent == doctest::Approx(0.5).epsilon(0.1));
    auto smooth = [](const Vec3& x) { return cplx(std::sin(x[0]) + x[1] * x[2]); };
    HolderFit lip = holder_probe(smooth, 3, Region{0.0, 1.0}, geometric_ladder(0.25, 6), {}, 200, 3);
    CHECK(lip.exponent == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("probe results depend only on the seed") {
    auto H = [](const Vec3& x) { return cplx(std::cbrt(x[0])); };
    auto a = holder_probe(H, 2, Region{0.0, 1.0}, geometric_ladder(0.25, 5), {}, 100, 9);
    auto b = holder_probe(H, 2, Region{0.0, 1.0}, geometric_ladder(0.25, 5), {}, 100, 9);
    CHECK(a.moduli == b.moduli);
}

TEST_CASE("zero smoothness reduces to the L^2 norm") {
    auto g = SphereGrid::make(3, 12);
    auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + w[0] * w[1]); });
    NormEstimate e = norm_estimate(f, NormFamily::first, 0.0);
    CHECK(e.total == doctest::Approx(l2_norm(f)).epsilon(1e-14));
    CHECK(parse_norm_family("second") == NormFamily::second);
    CHECK(to_string(NormFamily::integer) == "integer");
    CHECK_THROWS_AS(norm_estimate(f, NormFamily::second, 2.5), ValidationError);
    CHECK_THROWS_AS(norm_estimate(f, NormFamily::integer, 0.5), ValidationError);
}

TEST_CASE("first-difference estimate of a coordinate function") {
    auto g = SphereGrid::make(3, 8);
    auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(w[0]); });
    NormEstimate e = norm_estimate(f, NormFamily::first, 0.5);
    // sup_t t^{-1/2} 2 sin(t/2) ||w1|| is attained at t = 1 on the ladder.
    double per_generator = 2.0 * std::sin(0.5) * std::sqrt(4.0 * M_PI / 3.0);
    double best = *std::max_element(e.suprema.begin(), e.suprema.end());
    CHECK(best == doctest::Approx(per_generator).epsilon(1e-10));
    CHECK_FALSE(e.rough);
}

TEST_CASE("hemisphere indicator is flagged rough above order one half") {
    auto g = SphereGrid::make(3, 32);
    auto h = SphereField::from_function(g, [](const Vec3& w) { return cplx(w[2] > 0 ? 1.0 : 0.0); });
    NormEstimate e = norm_estimate(h, NormFamily::first, 0.75);
    CHECK(e.modulus_exponent == doctest::Approx(0.5).epsilon(0.1));
    CHECK(e.rough);
}

TEST_CASE("first and second differences are comparable") {
    auto g = SphereGrid::make(3, 12);
    for (int i = 0; i < 3; ++i) {
        SphereField f = random_field(g, 2 + i, 17, i);
        CHECK(l2_norm(f) == doctest::Approx(1.0).epsilon(1e-12));
        for (double s : {0.3, 0.8}) CHECK(difference_equivalence_check(f, s).holds);
    }
}

TEST_CASE("random fields are reproducible and consistent across grids") {
    auto a = random_field(SphereGrid::make(3, 10), 3, 5, 2);
    auto b = random_field(SphereGrid::make(3, 10), 3, 5, 2);
    CHECK(a.values() == b.values());
    auto c = random_field(SphereGrid::make(3, 20), 3, 5, 2);
    Vec3 p{0.6, 0.0, 0.8};
    CHECK(std::abs(a(p) - c(p)) < 1e-12);
}

TEST_CASE("smallness integrals shrink with epsilon") {
    std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
    SmallnessRecord r = smallness_probe(1.0, Vec3{0.8, 0.6, 0.0}, eps);
    CHECK(r.monotone);
    CHECK(r.ball_fit.exponent > 0.45);
    CHECK(r.annulus_fit.exponent > 1.0 / 6.0 - 0.05);
    CHECK_THROWS_AS(smallness_probe(1.0, Vec3{0.0, 0.0, 0.0}, eps), ValidationError);
}

TEST_CASE("smoothing probe refuses inadmissible pairs") {
    auto one = [](const Vec3&) { return cplx(1.0); };
    CHECK_THROWS_AS(smoothing_probe({one, one}, 2, 0.2, 16, 5), NumericalRefusal);
    CHECK_THROWS_AS(smoothing_probe({one, one}, 3, 1.2, 16, 5), ValidationError);
}

TEST_CASE("four-fold density with smooth factors on S^2 is nearly Lipschitz") {
    auto g = SphereGrid::make(3, 8);
    auto h = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + 0.3 * w[1]); });
    ConvDensity D(std::vector<SphereField>(4, h));
    HolderFit fit = holder_probe(D, Region{0.0, 4.0}, geometric_ladder(0.5, 6), 200, 1);
    CHECK(fit.exponent >= 0.90);
    CHECK_FALSE(fit.unstable);
}
