#include <doctest.h>

#include <cmath>

#include "sconv/oracle.hpp"
#include "sconv/parallel.hpp"

using namespace sconv;

TEST_CASE("counter generator is a pure function of seed and index") {
    CounterRng a(7, 3), b(7, 3), c(7, 4);
    for (int i = 0; i < 5; ++i) {
        auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
    CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("moments of constants are exact") {
    auto g = SphereGrid::make(3, 8);
    std::vector<SphereField> fs(2, SphereField::constant(g, 1.0));
    MCEstimate e = mc_moment(fs, builtin_test_function("one"), 20000, 1);
    CHECK(e.estimate.real() == doctest::Approx(16.0 * M_PI * M_PI).epsilon(1e-13));
    CHECK(e.std_error < 1e-6 * e.estimate.real());
    MCEstimate e5 = mc_moment(5, 3, [](int, const double*) { return cplx(1.0); }, builtin_test_function("one"), 10000, 1);
    CHECK(e5.estimate.real() == doctest::Approx(std::pow(sphere_area(5), 3)).epsilon(1e-13));
}

TEST_CASE("second moment of a sum of two unit vectors") {
    auto g = SphereGrid::make(3, 8);
    std::vector<SphereField> fs(2, SphereField::constant(g, 1.0));
    // E|nu1 + nu2|^2 = 2, times (4pi)^2
    MCEstimate e = mc_moment(fs, builtin_test_function("r2"), 200000, 5);
    CHECK(std::abs(e.estimate.real() - 32.0 * M_PI * M_PI) < 4.0 * e.std_error);
}

TEST_CASE("standard error shrinks like the inverse square root") {
    auto g = SphereGrid::make(3, 8);
    std::vector<SphereField> fs(2, SphereField::constant(g, 1.0));
    auto a = mc_moment(fs, builtin_test_function("r2"), 40000, 3);
    auto b = mc_moment(fs, builtin_test_function("r2"), 160000, 3);
    CHECK(a.std_error / b.std_error == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("estimates do not depend on the thread count") {
    auto g = SphereGrid::make(2, 8);
    auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + w[0]); });
    std::vector<SphereField> fs(3, f);
    int saved = thread_count();
    set_thread_count(1);
    auto a = mc_moment(fs, builtin_test_function("gauss"), 30000, 2);
    set_thread_count(3);
    auto b = mc_moment(fs, builtin_test_function("gauss"), 30000, 2);
    set_thread_count(saved);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("input validation") {
    auto g = SphereGrid::make(3, 8);
    std::vector<SphereField> fs(2, SphereField::constant(g, 1.0));
    CHECK_THROWS_AS(mc_moment(fs, builtin_test_function("one"), 9999, 1), ValidationError);
    CHECK_THROWS_AS(builtin_test_function("cosh"), ValidationError);
    CHECK_THROWS_AS(potential_oracle(-1.0), ValidationError);
}

TEST_CASE("single-layer potential") {
    for (double r : {0.0, 0.3, 1.0, 2.5}) {
        PotentialValue v = potential_oracle(r);
        CHECK(v.closed_form == doctest::Approx(4.0 * M_PI / std::max(r, 1.0)).epsilon(1e-14));
        CHECK(v.agrees());
    }
}

TEST_CASE("quadrature and sampling agree on the circle") {
    auto g = SphereGrid::make(2, 8);
    ConvDensity D(std::vector<SphereField>(2, SphereField::constant(g, 1.0)));
    CrosscheckRecord one = moment_crosscheck(D, builtin_test_function("one"), 1e-3, 100000, 4);
    CHECK(one.pass);
    CHECK(one.quadrature.real() == doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-10));
    CrosscheckRecord gauss = moment_crosscheck(D, builtin_test_function("gauss"), 1e-3, 100000, 4);
    CHECK(gauss.pass);
}
