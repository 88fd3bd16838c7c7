#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <random>

#include "sconv/conv.hpp"
#include "sconv/oracle.hpp"

using namespace sconv;

namespace {

// sigma * sigma on the circle and on S^2.
double circle_pair(double r) { return 4.0 / (r * std::sqrt(4.0 - r * r)); }
double sphere_pair(double r) { return 2.0 * M_PI / r; }

}  // namespace

TEST_CASE("admissible pairs") {
    CHECK(classify(3, 2).cls == PairClass::boundary);
    CHECK(classify(3, 3).cls == PairClass::boundary);
    CHECK(classify(3, 4).cls == PairClass::interior);
    CHECK(classify(2, 4).cls == PairClass::boundary);
    CHECK(classify(2, 6).cls == PairClass::interior);
    CHECK_FALSE(classify(2, 2).admissible());
    CHECK_FALSE(classify(3, 1).admissible());
    CHECK(classify(2, 2).label() == "(2,2)");
}

TEST_CASE("two-fold density of constants") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d : {2, 3}) {
        auto g = SphereGrid::make(d, 8);
        auto one = SphereField::constant(g, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            Vec3 x{u(rng), u(rng), d == 3 ? u(rng) : 0.0};
            double r = norm(x);
            if (r < 1e-3 || r > 2.0 - 1e-3) continue;
            double exact = d == 2 ? circle_pair(r) : sphere_pair(r);
            worst = std::max(worst, std::abs(two_fold_density(one, one, x) - exact) / exact);
        }
        CHECK(worst < 1e-12);
        CHECK(two_fold_density(one, one, Vec3{2.5, 0.0, 0.0}) == cplx(0.0));
    }
}

TEST_CASE("two-fold density of linear factors against direct circle quadrature") {
    auto g = SphereGrid::make(3, 8);
    auto a = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + w[0], w[2]); });
    auto b = SphereField::from_function(g, [](const Vec3& w) { return cplx(2.0 - w[1]); });
    Vec3 x{0.3, -0.5, 0.9};
    double r = norm(x);
    Vec3 u = (1.0 / r) * x, e1, e2;
    perpendicular_frame(u, e1, e2);
    double h = std::sqrt(1.0 - r * r / 4.0);
    cplx avg = 0.0;
    const int n = 64;
    for (int k = 0; k < n; ++k) {
        double t = 2.0 * M_PI * k / n;
        Vec3 nu = 0.5 * x + h * (std::cos(t) * e1 + std::sin(t) * e2);
        avg += a(nu) * b(x - nu);
    }
    avg /= double(n);
    CHECK(std::abs(two_fold_density(a, b, x) - sphere_pair(r) * avg) < 1e-12 * std::abs(sphere_pair(r) * avg));
}

TEST_CASE("densities refuse evaluation on singular sets") {
    auto g = SphereGrid::make(2, 8);
    ConvDensity D(std::vector<SphereField>(2, SphereField::constant(g, 1.0)));
    CHECK_THROWS_AS(D(Vec3{2.0, 0.0, 0.0}), NumericalRefusal);
    CHECK_THROWS_AS(D(Vec3{0.0, 0.0, 0.0}), NumericalRefusal);
    CHECK_NOTHROW(D(Vec3{1.0, 0.0, 0.0}));
}

TEST_CASE("M of constants on S^2 is the constant 2pi times the unit potential") {
    auto g = SphereGrid::make(3, 10);
    auto one = SphereField::constant(g, 1.0);
    auto M = m_operator({one, one, one});
    double expected = 2.0 * M_PI * potential_oracle(1.0).value();
    for (std::size_t i = 0; i < M.size(); ++i) CHECK(std::abs(M[i] - expected) < 1e-8 * expected);
}

TEST_CASE("M is symmetric in its arguments and equivariant") {
    auto g = SphereGrid::make(3, 10);
    auto a = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 + w[0], 0.2 * w[1]); });
    auto b = SphereField::from_function(g, [](const Vec3& w) { return cplx(1.0 - 0.5 * w[2] * w[1]); });
    auto c = SphereField::from_function(g, [](const Vec3& w) { return cplx(0.5 + w[1], -w[0]); });
    auto abc = m_operator({a, b, c});
    auto cab = m_operator({c, a, b});
    double scale = 0.0;
    for (std::size_t i = 0; i < abc.size(); ++i) scale = std::max(scale, std::abs(abc[i]));
    for (std::size_t i = 0; i < abc.size(); ++i) CHECK(std::abs(abc[i] - cab[i]) < 1e-8 * scale);

    Mat3 theta = euler_rotation(3, 0.4, 2.0, -1.3);
    auto rotated = m_operator({apply_rotation(theta, a), apply_rotation(theta, b), apply_rotation(theta, c)});
    auto expected = apply_rotation(theta, abc);
    for (std::size_t i = 0; i < abc.size(); ++i) CHECK(std::abs(rotated[i] - expected[i]) < 1e-8 * scale);
}

TEST_CASE("M on the circle needs five factors") {
    auto g = SphereGrid::make(2, 8);
    auto one = SphereField::constant(g, 1.0);
    CHECK_THROWS_AS(m_operator({one, one, one}), NumericalRefusal);
    auto M = m_operator(std::vector<SphereField>(5, one));
    double spread = 0.0;
    for (std::size_t i = 0; i < M.size(); ++i) spread = std::max(spread, std::abs(M[i] - M[0]));
    CHECK(spread < 1e-9 * std::abs(M[0]));
    CHECK(M[0].real() > 0.0);
}

TEST_CASE("densities carry the full mass of the product measure") {
    auto g = SphereGrid::make(3, 8);
    ConvDensity D(std::vector<SphereField>(2, SphereField::constant(g, 1.0)));
    cplx mass = density_pairing(D, builtin_test_function("one"));
    CHECK(mass.real() == doctest::Approx(16.0 * M_PI * M_PI).epsilon(1e-9));
}

TEST_CASE("tabulated CSV rows") {
    auto g = SphereGrid::make(2, 8);
    ConvDensity D(std::vector<SphereField>(2, SphereField::constant(g, 1.0)));
    std::ostringstream out;
    tabulate_csv(D, {Vec3{0.5, 0.0, 0.0}}, out);
    std::string text = out.str();
    CHECK(text.rfind("x1,x2,re,im,err\n", 0) == 0);
    double x1 = 0.0, x2 = 0.0, re = 0.0;
    REQUIRE(std::sscanf(text.c_str() + text.find('\n') + 1, "%lf,%lf,%lf", &x1, &x2, &re) == 3);
    CHECK(re == doctest::Approx(circle_pair(0.5)).epsilon(1e-12));
}
