#include <doctest.h>

#include <cmath>
#include <random>

#include "sconv/functional.hpp"

using namespace sconv;

namespace {

const double kSixteenPiFourth = 16.0 * std::pow(M_PI, 4);

}  // namespace

TEST_CASE("extension of constants") {
    auto g2 = SphereGrid::make(2, 16);
    CHECK(extension(SphereField::constant(g2, 1.0), Vec3{0, 0, 0}).real() == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
    auto g = SphereGrid::make(3, 24);
    auto one = SphereField::constant(g, 1.0);
    CHECK(extension(one, Vec3{0, 0, 0}).real() == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
    for (double r : {0.5, 2.0, 5.0}) {
        Vec3 x = r * Vec3{0.36, 0.48, 0.8};
        CHECK(std::abs(extension(one, x) - 4.0 * M_PI * std::sin(r) / r) < 1e-8);
    }
}

TEST_CASE("antipodally symmetric fields have real extensions") {
    auto g = SphereGrid::make(3, 20);
    auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(w[0] * w[0]); });
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    for (int i = 0; i < 10; ++i) CHECK(std::abs(extension(f, Vec3{n(rng), n(rng), n(rng)}).imag()) < 1e-10);
}

TEST_CASE("Phi of constants on S^2 with q = 4") {
    auto g = SphereGrid::make(3, 12);
    auto one = SphereField::constant(g, 1.0);
    FunctionalValue v = phi_functional(one, 4);
    CHECK(v.phi == doctest::Approx(kSixteenPiFourth).epsilon(1e-10));
    CHECK(v.lambda == v.phi);
    CHECK(v.q_conj == doctest::Approx(4.0 / 3.0));
    CHECK(v.l2norm == doctest::Approx(std::sqrt(4.0 * M_PI)));
    CHECK(phi_functional(one.scaled(cplx(0.0, -7.0)), 4).phi == doctest::Approx(v.phi).epsilon(1e-12));
}

TEST_CASE("Phi is invariant under rotation and conjugate reflection") {
    auto g = SphereGrid::make(3, 12);
    auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + 0.3 * w[0] + 0.2 * w[1] * w[2], 0.1 * w[2]); });
    double base = phi_functional(f, 4).phi;
    Mat3 theta = euler_rotation(3, 1.2, 0.4, 2.9);
    CHECK(std::abs(phi_functional(apply_rotation(theta, f), 4).phi - base) < 1e-8 * base);
    CHECK(std::abs(phi_functional(conjugate_reflection(f), 4).phi - base) < 1e-8 * base);
    CHECK(base < kSixteenPiFourth);
}

TEST_CASE("Phi rejects odd, subcritical and zero input") {
    auto g = SphereGrid::make(3, 8);
    auto one = SphereField::constant(g, 1.0);
    CHECK_THROWS_AS(phi_functional(one, 5), ValidationError);
    CHECK_THROWS_AS(phi_functional(one, 2), NumericalRefusal);
    CHECK_THROWS_AS(phi_functional(SphereField::constant(g, 0.0), 4), ValidationError);
    auto g2 = SphereGrid::make(2, 8);
    CHECK_THROWS_AS(phi_functional(SphereField::constant(g2, 1.0), 4), NumericalRefusal);
    CHECK(phi_functional(SphereField::constant(g2, 1.0), 6).phi > 0.0);
}

TEST_CASE("lambda of constants matches the potential value") {
    auto g = SphereGrid::make(3, 10);
    auto one = SphereField::constant(g, 1.0);
    // (2pi)^3 * 8pi^2 / (4pi)
    double expected = std::pow(2.0 * M_PI, 3) * 8.0 * M_PI * M_PI / (4.0 * M_PI);
    CHECK(lambda_check(one, {0, 1, 0}) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(lambda_check(one.scaled(3.5), {0, 1, 0}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_check(one, {0, 2, 0}), ValidationError);
}

TEST_CASE("truncated direct L^4 norm agrees with the convolution form") {
    auto g = SphereGrid::make(3, 12);
    auto one = SphereField::constant(g, 1.0);
    double conv = std::pow(2.0 * M_PI, 3) * 32.0 * std::pow(M_PI, 3);
    double direct = truncated_lq_power(one, 4, 30.0, 8);
    CHECK(std::abs(direct - conv) < 0.05 * conv);
    CHECK(direct < conv);
}
