#include "sconv/functional.hpp"

#include <algorithm>
#include <cmath>

#include "sconv/conv.hpp"
#include "sconv/harmonics.hpp"
#include "sconv/parallel.hpp"
#include "sconv/quadrature.hpp"

namespace sconv {

cplx extension(const SphereField& f, const Vec3& x) {
    const auto& g = *f.grid();
    cplx total(0.0);
    for (std::size_t i = 0; i < g.size(); ++i) total += g.weights()[i] * f[i] * std::polar(1.0, -dot(x, g.node(i)));
    return total;
}

FunctionalValue phi_functional(const SphereField& f, int q, int refine) {
    const int d = f.dim();
    if (q % 2 != 0) throw ValidationError("q must be even for the convolution form");
    const int n = q / 2;
    AdmissiblePair pair = classify(d, 2 * n - 2);
    if (!pair.admissible()) throw NumericalRefusal("inadmissible (d,q) = (" + std::to_string(d) + "," + std::to_string(q) + ")");
    const double norm_f = l2_norm(f);
    if (!(norm_f > 0.0)) throw ValidationError("Phi is undefined for the zero field");
    SphereField u = f.scaled(1.0 / norm_f);
    std::vector<int> flags(2 * n - 1, 0);
    for (int i = n; i < 2 * n - 1; ++i) flags[i] = 1;
    SphereField M = m_operator(reflected_factors(u, flags), refine);
    FunctionalValue v;
    v.d = d;
    v.q = q;
    v.l2norm = norm_f;
    v.phi = std::pow(2.0 * M_PI, d) * inner_product(M, u).real();
    v.lambda = v.phi;
    v.q_conj = double(q) / (q - 1);
    return v;
}

std::vector<SphereField> reflected_factors(const SphereField& f, const std::vector<int>& flags) {
    SphereField r = conjugate_reflection(f);
    std::vector<SphereField> out;
    out.reserve(flags.size());
    for (int k : flags) {
        if (k != 0 && k != 1) throw ValidationError("reflection flags must be 0 or 1");
        out.push_back(k ? r : f);
    }
    return out;
}

double lambda_check(const SphereField& f, const std::vector<int>& flags, const SphereField* a, int refine) {
    const double norm_f = l2_norm(f);
    if (!(norm_f > 0.0)) throw ValidationError("lambda is undefined for the zero field");
    SphereField u = f.scaled(1.0 / norm_f);
    SphereField M = m_operator(reflected_factors(u, flags), refine);
    if (a) M = (*a) * M;
    return std::pow(2.0 * M_PI, f.dim()) * inner_product(M, u).real();
}

double truncated_lq_power(const SphereField& f, int q, double radius, int angular_resolution) {
    if (f.dim() != 3) throw ValidationError("the direct L^q check is implemented for d = 3");
    if (!f.band_limited()) throw ValidationError("the direct L^q check needs a band-limited field");
    if (!(radius > 0.0)) throw ValidationError("radius must be positive");
    const int D = f.degree();
    GridPtr ang = SphereGrid::make(3, std::max(angular_resolution, (q * D) / 2 + 2));
    // degree-l parts of f at the angular nodes
    std::vector<cplx> parts(ang->size() * (D + 1));
    std::vector<cplx> c(sh_count(D));
    for (int l = 0; l <= D; ++l) {
        std::fill(c.begin(), c.end(), cplx(0.0));
        for (int m = -l; m <= l; ++m) c[sh_index(l, m)] = f.coefficients()[sh_index(l, m)];
        for (std::size_t k = 0; k < ang->size(); ++k) parts[k * (D + 1) + l] = sh_synthesize(c.data(), D, ang->node(k));
    }
    const int panels = int(std::ceil(radius));
    const Rule ref = gauss_legendre(10);
    std::vector<double> partial(panels, 0.0);
    parallel_for(panels, [&](std::size_t p) {
        double lo = radius * p / panels, hi = radius * (p + 1) / panels;
        double mid = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        std::vector<cplx> radial(D + 1);
        double acc = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            double r = mid + h * ref.x[i];
            cplx phase(1.0);
            for (int l = 0; l <= D; ++l) {
                radial[l] = 4.0 * M_PI * phase * std::sph_bessel(l, r);
                phase *= cplx(0.0, -1.0);
            }
            double shell = 0.0;
            for (std::size_t k = 0; k < ang->size(); ++k) {
                cplx e(0.0);
                for (int l = 0; l <= D; ++l) e += radial[l] * parts[k * (D + 1) + l];
                shell += ang->weights()[k] * std::pow(std::abs(e), q);
            }
            acc += h * ref.w[i] * r * r * shell;
        }
        partial[p] = acc;
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

}  // namespace sconv
