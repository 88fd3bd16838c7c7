#include "sconv/el.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sconv/conv.hpp"
#include "sconv/functional.hpp"

namespace sconv {

LambdaMode parse_lambda_mode(const std::string& s) {
    if (s == "free") return LambdaMode::free;
    if (s == "absorbed") return LambdaMode::absorbed;
    throw ValidationError("lambda mode must be 'free' or 'absorbed'");
}

std::string to_string(LambdaMode mode) { return mode == LambdaMode::free ? "free" : "absorbed"; }

ELProblem::ELProblem(int m, std::vector<int> flags, SphereField init, LambdaMode mode, std::optional<SphereField> weight,
                     int max_iter, double tol, int refine)
    : m_(m), flags_(std::move(flags)), init_(std::move(init)), mode_(mode), weight_(std::move(weight)),
      max_iter_(max_iter), tol_(tol), refine_(refine) {
    if (!init_.grid()) throw ValidationError("initial field without a grid");
    if (!(l2_norm(init_) > 0.0)) throw ValidationError("initial field is zero");
    AdmissiblePair pair = classify(init_.dim(), m_);
    if (!pair.admissible())
        throw NumericalRefusal("inadmissible " + pair.label());
    if (int(flags_.size()) != m_ + 1) throw ValidationError("expected m+1 reflection flags");
    for (int k : flags_)
        if (k != 0 && k != 1) throw ValidationError("reflection flags must be 0 or 1");
    if (max_iter_ < 1) throw ValidationError("max iterations must be positive");
    if (!(tol_ > 0.0)) throw ValidationError("tolerance must be positive");
    if (refine_ < 0) throw ValidationError("refine must be non-negative");
    if (weight_) {
        if (!weight_->grid()->same_as(*init_.grid())) throw ValidationError("weight lives on a different grid");
        if (mode_ == LambdaMode::absorbed)
            for (const cplx& v : weight_->values())
                if (std::abs(v) == 0.0) throw ValidationError("absorbed mode needs a weight without zeros on the nodes");
    }
}

SphereField ELProblem::image(const SphereField& f) const {
    SphereField M = m_operator(reflected_factors(f, flags_), refine_);
    return weight_ ? (*weight_) * M : M;
}

bool ELProblem::image_gives_phi() const {
    if (weight_ || m_ % 2 != 0) return false;
    int reflected = 0;
    for (int k : flags_) reflected += k;
    return reflected == m_ / 2;
}

SphereField normalize(const SphereField& f) {
    double n = l2_norm(f);
    if (!(n > 0.0)) throw NumericalRefusal("cannot normalize the zero field");
    cplx anchor = integral(f);
    if (std::abs(anchor) <= 1e-12 * n * std::sqrt(sphere_area(f.dim()))) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < f.size(); ++i)
            if (std::abs(f[i]) > std::abs(f[best]) * (1.0 + 1e-12)) best = i;
        anchor = f[best];
    }
    return f.scaled(std::conj(anchor) / std::abs(anchor) / n);
}

double el_residual(const SphereField& f, const ELProblem& p, double lambda) {
    if (!f.grid()->same_as(*p.grid())) throw ValidationError("field is not on the problem grid");
    double n = l2_norm(f);
    if (!(n > 0.0)) throw ValidationError("residual is undefined for the zero field");
    SphereField u = f.scaled(1.0 / n);
    SphereField r = p.image(u) - u.scaled(lambda * std::pow(2.0 * M_PI, -p.dim()));
    return l2_norm(r);
}

namespace {

double scale_invariant_phi(const ELProblem& p, const SphereField& f, double lambda) {
    if (p.image_gives_phi()) return lambda;
    if ((p.m() + 2) % 2 != 0) return std::numeric_limits<double>::quiet_NaN();
    return phi_functional(f, p.m() + 2, p.refine()).phi;
}

}  // namespace

ELReport solve(const ELProblem& p) {
    const int d = p.dim();
    const double c = std::pow(2.0 * M_PI, d);
    if (!(l2_norm(p.init()) > 0.0)) throw ValidationError("initial field is zero");
    // image norm of the normalised constant times sup |a|, the scale for degeneracy
    SphereField u0 = SphereField::constant(p.grid(), 1.0 / std::sqrt(sphere_area(d)));
    double floor = l2_norm(m_operator(std::vector<SphereField>(p.m() + 1, u0), p.refine()));
    if (p.weight()) {
        double amax = 0.0;
        for (const cplx& v : p.weight()->values()) amax = std::max(amax, std::abs(v));
        floor *= amax;
    }
    ELReport rep;
    SphereField f = normalize(p.init());
    for (int k = 0; k < p.max_iter(); ++k) {
        SphereField img = p.image(f);
        double mu = inner_product(img, f).real();
        double lambda = c * mu;
        double res = l2_norm(img - f.scaled(mu));
        rep.lambda_trace.push_back(lambda);
        rep.residual_trace.push_back(res);
        rep.phi_trace.push_back(scale_invariant_phi(p, f, lambda));
        rep.iterations = k + 1;
        rep.field = f;
        rep.final_residual = res;
        rep.final_phi = rep.phi_trace.back();
        if (!(l2_norm(img) > 1e-12 * floor)) {
            rep.status = "degenerate";
            rep.diagnostics["degenerate"] = "the image vanished; lambda = 0 forces f = 0";
            return rep;
        }
        SphereField next = normalize(img);
        double step = l2_norm(next - f);
        rep.step_trace.push_back(step);
        if (step < p.tol() && res < p.tol()) {
            rep.converged = true;
            break;
        }
        f = std::move(next);
    }
    rep.status = rep.converged ? "converged" : "max-iterations";
    if (p.mode() == LambdaMode::absorbed) {
        double mu = rep.lambda_trace.back() / c;
        if (!(mu > 0.0)) {
            rep.status = "degenerate";
            rep.converged = false;
            rep.diagnostics["degenerate"] = "pairing <a M(f), f> is not positive; lambda cannot be absorbed";
            return rep;
        }
        rep.field = rep.field.scaled(std::pow(mu, -1.0 / p.m()));
    }
    return rep;
}

json ELReport::to_json(const ELProblem& p) const {
    return json{{"d", p.dim()},
                {"m", p.m()},
                {"flags", p.flags()},
                {"lambda_mode", sconv::to_string(p.mode())},
                {"tol", p.tol()},
                {"max_iter", p.max_iter()},
                {"iters", iterations},
                {"lambda_trace", lambda_trace},
                {"residual_trace", residual_trace},
                {"phi_trace", phi_trace},
                {"step_trace", step_trace},
                {"final_phi", final_phi},
                {"final_residual", final_residual},
                {"converged", converged},
                {"status", status},
                {"diagnostics", diagnostics},
                {"field", field_to_json(field)}};
}

}  // namespace sconv
