#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sconv/conv.hpp"
#include "sconv/io.hpp"

namespace sconv {

// Counter-based generator: stream `index` of `seed`, independent of
// evaluation order. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;
    CounterRng(std::uint64_t seed, std::uint64_t index);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    std::uint64_t key_, counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Test function on R^d; x has d entries.
struct TestFunction {
    std::string name;
    std::function<cplx(const double* x, int d)> eval;
};

// one, x1, r2 (|x|^2), gauss (exp(-|x|^2)).
TestFunction builtin_test_function(const std::string& name);
std::vector<std::string> builtin_test_function_names();

struct MCEstimate {
    cplx estimate;
    double std_error = 0.0;
    std::size_t samples = 0;
    json to_json() const;
};

// E[g(nu_1 + ... + nu_k) prod_j factor(j, nu_j)] times |S^{d-1}|^k over
// independent uniform nu_j; works in any dimension d >= 2.
MCEstimate mc_moment(int d, int k, const std::function<cplx(int j, const double* nu)>& factor,
                     const TestFunction& g, std::size_t samples, std::uint64_t seed);
MCEstimate mc_moment(const std::vector<SphereField>& factors, const TestFunction& g, std::size_t samples,
                     std::uint64_t seed);

struct PotentialValue {
    double closed_form = 0.0;
    double quadrature = 0.0;  // adaptive cross-check
    double value() const { return closed_form; }
    bool agrees(double tol = 1e-9) const { return std::abs(closed_form - quadrature) <= tol * closed_form; }
};

// int_{S^2} dsigma(nu) / |x - nu| with |x| = r.
PotentialValue potential_oracle(double r);

// Volume quadrature of int density(x) g(x) dx in polar coordinates.
cplx density_pairing(const ConvDensity& density, const TestFunction& g);

struct CrosscheckRecord {
    cplx quadrature, monte_carlo;
    double std_error = 0.0;
    double delta = 0.0;
    double allowed = 0.0;
    bool pass = false;
    json to_json() const;
};

// Passes when |quadrature - MC| <= max(tol |MC|, 3 stderr).
CrosscheckRecord moment_crosscheck(const ConvDensity& density, const TestFunction& g, double tol,
                                   std::size_t samples = 1000000, std::uint64_t seed = 1);

}  // namespace sconv
