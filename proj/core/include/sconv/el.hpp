#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sconv/io.hpp"
#include "sconv/sphere.hpp"

namespace sconv {

enum class LambdaMode { free, absorbed };

LambdaMode parse_lambda_mode(const std::string& s);
std::string to_string(LambdaMode mode);

// Euler-Lagrange fixed-point problem a M(R^{k_1} f, ..., R^{k_{m+1}} f) = lambda f.
class ELProblem {
public:
    // Throws NumericalRefusal for an inadmissible (d, m) and ValidationError
    // for malformed flags, weights or tolerances.
    ELProblem(int m, std::vector<int> flags, SphereField init, LambdaMode mode = LambdaMode::free,
              std::optional<SphereField> weight = std::nullopt, int max_iter = 50, double tol = 1e-10, int refine = 0);

    int dim() const { return init_.dim(); }
    int m() const { return m_; }
    const std::vector<int>& flags() const { return flags_; }
    LambdaMode mode() const { return mode_; }
    const SphereField& init() const { return init_; }
    const std::optional<SphereField>& weight() const { return weight_; }
    int max_iter() const { return max_iter_; }
    double tol() const { return tol_; }
    int refine() const { return refine_; }
    const GridPtr& grid() const { return init_.grid(); }

    // a M(R^{k_1} f, ...).
    SphereField image(const SphereField& f) const;
    // True when Phi_{d,m+2}(f) = (2pi)^d <image(f), f> / ||f||^{m+2}.
    bool image_gives_phi() const;

private:
    int m_;
    std::vector<int> flags_;
    SphereField init_;
    LambdaMode mode_;
    std::optional<SphereField> weight_;
    int max_iter_;
    double tol_;
    int refine_;
};

struct ELReport {
    int iterations = 0;
    std::vector<double> lambda_trace, residual_trace, phi_trace, step_trace;
    SphereField field;
    double final_phi = 0.0;
    double final_residual = 0.0;
    bool converged = false;
    std::string status;  // converged, max-iterations, degenerate
    json diagnostics = json::object();  // filled by regularity_lab

    json to_json(const ELProblem& p) const;
};

// ||f|| = 1 with <f, 1> real and positive (largest nodal value when <f, 1> = 0).
SphereField normalize(const SphereField& f);

// ||a M(R^{k} f) - (2pi)^{-d} lambda ||f||^m f|| / ||f||^{m+1}.
double el_residual(const SphereField& f, const ELProblem& p, double lambda);

ELReport solve(const ELProblem& p);

}  // namespace sconv
