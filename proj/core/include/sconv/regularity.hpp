#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sconv/conv.hpp"
#include "sconv/el.hpp"
#include "sconv/io.hpp"

namespace sconv {

// Least-squares power law modulus ~ constant * scale^exponent.
struct HolderFit {
    std::vector<double> scales;  // strictly decreasing
    std::vector<double> moduli;  // nondecreasing in scale
    std::size_t pairs_per_scale = 0;
    double exponent = 0.0;
    double constant = 0.0;
    double residual = 0.0;  // rms of the log-log fit
    double exponent_without_coarsest = 0.0;
    bool unstable = false;  // dropping the coarsest scale moves the exponent by >= 0.05

    // Independent re-fit of the stored (log scale, log modulus) pairs.
    double refit() const;
    json to_json() const;
    void write_csv(std::ostream& out) const;
};

HolderFit fit_power_law(std::vector<double> scales, std::vector<double> moduli, std::size_t pairs = 0);

// Base points are drawn with |x| in [r_min, r_max].
struct Region {
    double r_min = 0.0, r_max = 1.0;
};

std::vector<double> geometric_ladder(double r0, int count, double ratio = 0.5);

// Max |H(x) - H(x')| over sampled pairs with |x - x'| <= r_k, using random,
// radial and tangential partner directions. A quarter of the base points sit
// on the `focus` radii with radial partners. Points within kSingularOffset of
// a radius in `singular` are never evaluated.
HolderFit holder_probe(const std::function<cplx(const Vec3&)>& H, int d, Region region,
                       const std::vector<double>& ladder, const std::vector<double>& singular, int pairs = 200,
                       std::uint64_t seed = 1, const std::vector<double>& focus = {});
// Densities focus on their kink radii and support edge.
HolderFit holder_probe(const ConvDensity& density, Region region, const std::vector<double>& ladder, int pairs = 200,
                       std::uint64_t seed = 1);
// H_gamma(x) = |x|^gamma * density(x), with H_gamma(0) = 0.
HolderFit weighted_holder_probe(const ConvDensity& density, double gamma, Region region,
                                const std::vector<double>& ladder, int pairs = 200, std::uint64_t seed = 1);

struct LogSingularityRecord {
    std::vector<double> radii, values, ratios;
    double slope = 0.0, intercept = 0.0;  // value ~ intercept + slope log(1/|x|)
    double max_ratio = 0.0, min_ratio = 0.0;
    double variation() const { return max_ratio / min_ratio; }
    json to_json() const;
};

// Four-fold circle density at |x| = 10^{-k}, k = 1..kmax.
LogSingularityRecord log_singularity_probe(const ConvDensity& density, int kmax = 4);

struct SmallnessRecord {
    double gamma = 1.0, s = 0.0;
    Vec3 x{};
    std::vector<double> epsilons, annulus, ball;
    HolderFit annulus_fit, ball_fit;
    double annulus_bound = 0.0, ball_bound = 0.0;  // predicted exponents
    bool monotone = true;
    json to_json() const;
};

// |x|^gamma int F(y) F(x-y) dy over {y in B_2 : 2 - eps <= |x-y| <= 2} and
// over B_2 cap B(x, eps), F = sigma * sigma on the circle.
SmallnessRecord smallness_probe(double gamma, const Vec3& x, const std::vector<double>& epsilons, double s = 0.0,
                                int refine = 0);

enum class NormFamily { first, second, integer };
NormFamily parse_norm_family(const std::string& s);
std::string to_string(NormFamily family);

struct NormEstimate {
    NormFamily family = NormFamily::first;
    double s = 0.0;
    std::vector<double> ladder;
    // One entry per (composition Y, generator) pair.
    std::vector<std::string> labels;
    std::vector<std::vector<double>> differences;  // ||Delta_t Y f|| per ladder entry
    std::vector<double> suprema;                   // sup_t t^{-alpha} ||Delta_t Y f||
    double l2 = 0.0;
    double total = 0.0;
    double noise_floor = 0.0;
    double modulus_exponent = 1.0;  // fitted over resolved scales
    double resolved_scale = 0.0;
    bool rough = false;  // modulus exponent below the fractional order
    json to_json() const;
};

// First differences: s in [0, 3) non-integer or 0, compositions of floor(s)
// flow derivatives. Second differences: s in [0, 2). Integer: s in {0,..,3}.
NormEstimate norm_estimate(const SphereField& f, NormFamily family, double s, int kmax = 12);

struct EquivalenceRecord {
    double s = 0.0;
    double first_sup = 0.0, second_sup = 0.0;
    double ratio = 0.0;
    double constant = 0.0;  // 1 / (2 (1 - 2^{-(1-s)}))
    double l2 = 0.0;
    bool holds = false;  // first <= constant * second + 0.1 ||f||
    json to_json() const;
};

EquivalenceRecord difference_equivalence_check(const SphereField& f, double s, int kmax = 12);

// Field with independent complex Gaussian harmonic coefficients up to
// `degree`, unit L^2 norm. Coefficients of a given degree do not depend on
// the grid, so the same stream refines consistently.
SphereField random_field(const GridPtr& grid, int degree, std::uint64_t seed, std::uint64_t stream);

struct SmoothingRecord {
    int d = 0, m = 0;
    double s = 0.0;
    std::vector<int> resolutions;
    std::vector<double> max_gain;
    double growth = 0.0;
    std::size_t samples = 0;
    json to_json() const;
};

// max over unit random g of the first-difference H^s estimate of
// M(phi_1, ..., phi_m, g), at `resolution` and at twice it.
SmoothingRecord smoothing_probe(const std::vector<std::function<cplx(const Vec3&)>>& phis, int d, double s,
                                int resolution, int samples = 50, std::uint64_t seed = 1);

struct StabilityRecord {
    std::vector<int> resolutions;
    std::vector<double> s_values;
    std::vector<bool> converged;
    std::vector<int> iterations;
    std::vector<double> residuals;
    std::vector<std::vector<double>> estimates;  // [resolution][s]
    std::vector<std::vector<double>> ratios;     // [step][s]
    double max_ratio = 0.0;
    bool all_converged = true;
    json to_json() const;
};

// Re-solves `base` on each resolution from the interpolated initial data and
// weight, then compares first-difference estimates.
StabilityRecord refinement_stability(const ELProblem& base, const std::vector<int>& resolutions,
                                     const std::vector<double>& s_values);

}  // namespace sconv
