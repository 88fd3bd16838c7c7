#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sconv/conv.hpp"
#include "sconv/el.hpp"
#include "sconv/functional.hpp"
#include "sconv/io.hpp"
#include "sconv/oracle.hpp"
#include "sconv/parallel.hpp"
#include "sconv/regularity.hpp"

using namespace sconv;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRefusal = 3;

struct Output {
    json result = json::object();
    std::string csv;  // empty when the command has no CSV form
    int status = 0;
};

struct Common {
    std::string out;
    std::string format = "json";
    int threads = 0;
};

std::vector<int> parse_flags(const std::string& text) {
    std::vector<int> out;
    for (char c : text) {
        if (c == ',' || c == ' ') continue;
        if (c != '0' && c != '1') throw ValidationError("reflection flags must be 0 or 1");
        out.push_back(c - '0');
    }
    return out;
}

Vec3 parse_point(const std::string& text, int d) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ValidationError("bad coordinate '" + item + "'");
        }
    }
    if (int(v.size()) != d) throw ValidationError("point '" + text + "' needs " + std::to_string(d) + " coordinates");
    return {v[0], v[1], d == 3 ? v[2] : 0.0};
}

json typed_value(const std::string& text) {
    if (json::accept(text)) {
        json v = json::parse(text);
        if (v.is_number() || v.is_boolean()) return v;
    }
    return text;
}

json resolved_config(const CLI::App* sub) {
    json cfg = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        std::string name = opt->get_single_name();
        if (name.empty() || name == "help") continue;
        if (opt->count() > 0) {
            auto r = opt->reduced_results();
            if (opt->get_type_size() == 0)
                cfg[name] = true;
            else if (r.size() == 1)
                cfg[name] = typed_value(r[0]);
            else {
                json list = json::array();
                for (const auto& item : r) list.push_back(typed_value(item));
                cfg[name] = list;
            }
        } else if (opt->get_type_size() == 0) {
            cfg[name] = false;
        } else {
            cfg[name] = typed_value(opt->get_default_str());
        }
    }
    return cfg;
}

std::string with_output_dir(const std::string& path) {
    const char* dir = std::getenv("SCONV_OUTPUT_DIR");
    if (!dir || path.empty() || path[0] == '/') return path;
    std::string base(dir);
    if (!base.empty() && base.back() != '/') base += '/';
    return base + path;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(with_output_dir(path));
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

std::string csv_header(const std::string& command, const json& config) {
    return "# sconv " SCONV_VERSION " " + command + "\n# config " + config.dump() + "\n";
}

GridPtr grid_for(int d, int res) {
    if (d != 2 && d != 3) throw ValidationError("grid-based commands need d in {2, 3}");
    return SphereGrid::make(d, res);
}

std::vector<SphereField> factor_list(const GridPtr& grid, const std::string& field, const std::vector<std::string>& fields,
                                     int count) {
    if (!fields.empty()) {
        if (int(fields.size()) != count)
            throw ValidationError("--fields needs " + std::to_string(count) + " entries");
        std::vector<SphereField> out;
        for (const auto& f : fields) out.push_back(make_named_field(grid, f));
        return out;
    }
    return std::vector<SphereField>(count, make_named_field(grid, field));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for convolutions of sphere measures and sharp restriction functionals", "sconv"};
    app.set_version_flag("--version", std::string(SCONV_VERSION));
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values", false);
    app.allow_config_extras(false);

    Common common;
    app.add_option("--threads", common.threads, "Worker cap (default: logical cores)")->check(CLI::NonNegativeNumber);

    std::function<Output()> action;
    CLI::App* chosen = nullptr;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "Output path (default: stdout)");
        sub->add_option("--format", common.format, "json or csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
    };

    // ------------------------------------------------------------ density
    struct {
        int d = 3, k = 2, res = 16, refine = 0;
        std::string field = "const", direction;
        std::vector<std::string> fields, points;
        std::vector<double> radii;
    } den;
    CLI::App* density = app.add_subcommand("density", "Evaluate a k-fold convolution density at points");
    density->add_option("--d", den.d, "Dimension")->capture_default_str();
    density->add_option("--k", den.k, "Number of factors")->capture_default_str();
    density->add_option("--res", den.res, "Grid resolution")->capture_default_str();
    density->add_option("--refine", den.refine, "Extra refinement levels")->capture_default_str();
    density->add_option("--field", den.field, "Factor constructor used for every factor")->capture_default_str();
    density->add_option("--fields", den.fields, "One constructor per factor")->delimiter(';');
    density->add_option("--point", den.points, "Point x1,x2[,x3] (repeatable)");
    density->add_option("--radii", den.radii, "Radii along --direction")->delimiter(',');
    density->add_option("--direction", den.direction, "Unit direction for --radii (default e1)");
    add_common(density);
    density->callback([&] {
        chosen = density;
        action = [&] {
            GridPtr grid = grid_for(den.d, den.res);
            if (den.k < 2) throw ValidationError("--k must be at least 2");
            ConvDensity D(factor_list(grid, den.field, den.fields, den.k), den.refine);
            std::vector<Vec3> pts;
            for (const auto& p : den.points) pts.push_back(parse_point(p, den.d));
            Vec3 dir{1.0, 0.0, 0.0};
            if (!den.direction.empty()) {
                dir = parse_point(den.direction, den.d);
                double n = norm(dir);
                if (!(n > 0.0)) throw ValidationError("direction must be nonzero");
                dir = (1.0 / n) * dir;
            }
            for (double r : den.radii) pts.push_back(r * dir);
            if (pts.empty()) throw ValidationError("give --point or --radii");
            Output o;
            std::ostringstream csv;
            tabulate_csv(D, pts, csv);
            o.csv = csv.str();
            json rows = json::array();
            std::istringstream in(o.csv);
            std::string line;
            std::getline(in, line);
            for (std::size_t i = 0; std::getline(in, line); ++i) {
                std::vector<double> v;
                std::stringstream ss(line);
                std::string item;
                while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
                json x = json::array();
                for (int c = 0; c < den.d; ++c) x.push_back(v[c]);
                rows.push_back({{"x", x}, {"re", v[den.d]}, {"im", v[den.d + 1]}, {"err", v[den.d + 2]}});
            }
            o.result = {{"d", den.d}, {"k", den.k}, {"singular_radii", D.singular_radii()}, {"values", rows}};
            return o;
        };
    });

    // ------------------------------------------------------------ m-op
    struct {
        int d = 3, m = 2, res = 16, refine = 0;
        std::string field = "const", flags;
        std::vector<std::string> fields;
    } mop;
    CLI::App* mcmd = app.add_subcommand("m-op", "Apply the multilinear operator M on the grid");
    mcmd->add_option("--d", mop.d, "Dimension")->capture_default_str();
    mcmd->add_option("--m", mop.m, "m (m+1 factors)")->capture_default_str();
    mcmd->add_option("--res", mop.res, "Grid resolution")->capture_default_str();
    mcmd->add_option("--refine", mop.refine, "Extra refinement levels")->capture_default_str();
    mcmd->add_option("--field", mop.field, "Factor constructor")->capture_default_str();
    mcmd->add_option("--fields", mop.fields, "One constructor per factor")->delimiter(';');
    mcmd->add_option("--flags", mop.flags, "Conjugate reflection flags, e.g. 010");
    add_common(mcmd);
    mcmd->callback([&] {
        chosen = mcmd;
        action = [&] {
            AdmissiblePair pair = classify(mop.d, mop.m);
            if (!pair.admissible()) throw NumericalRefusal("inadmissible " + pair.label());
            GridPtr grid = grid_for(mop.d, mop.res);
            std::vector<SphereField> factors = factor_list(grid, mop.field, mop.fields, mop.m + 1);
            if (!mop.flags.empty()) {
                std::vector<int> flags = parse_flags(mop.flags);
                if (int(flags.size()) != mop.m + 1) throw ValidationError("expected m+1 reflection flags");
                for (std::size_t i = 0; i < flags.size(); ++i)
                    if (flags[i]) factors[i] = conjugate_reflection(factors[i]);
            }
            SphereField M = m_operator(factors, mop.refine);
            Output o;
            o.result = {{"d", mop.d}, {"m", mop.m}, {"class", pair.cls == PairClass::interior ? "interior" : "boundary"},
                        {"alpha", pair.alpha}, {"field", field_to_json(M)}};
            return o;
        };
    });

    // ------------------------------------------------------------ phi
    struct {
        int d = 3, q = 4, res = 16, refine = 0;
        std::string field = "const";
    } ph;
    CLI::App* phi = app.add_subcommand("phi", "Evaluate the restriction functional Phi_{d,q}");
    phi->add_option("--d", ph.d, "Dimension")->capture_default_str();
    phi->add_option("--q", ph.q, "Even exponent q")->capture_default_str();
    phi->add_option("--res", ph.res, "Grid resolution")->capture_default_str();
    phi->add_option("--refine", ph.refine, "Extra refinement levels")->capture_default_str();
    phi->add_option("--field", ph.field, "Field constructor")->capture_default_str();
    add_common(phi);
    phi->callback([&] {
        chosen = phi;
        action = [&] {
            FunctionalValue v = phi_functional(make_named_field(grid_for(ph.d, ph.res), ph.field), ph.q, ph.refine);
            Output o;
            o.result = {{"d", v.d}, {"q", v.q}, {"phi", v.phi}, {"lambda", v.lambda}, {"l2norm", v.l2norm},
                        {"q_conjugate", v.q_conj}};
            return o;
        };
    });

    // ------------------------------------------------------------ solve
    struct {
        int d = 3, m = 2, res = 16, max_iter = 50, refine = 0;
        std::string flags = "010", mode = "free", init = "const", weight;
        double tol = 1e-10;
    } sol;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Fixed-point iteration for the Euler-Lagrange equation");
    solve_cmd->add_option("--d", sol.d, "Dimension")->capture_default_str();
    solve_cmd->add_option("--m", sol.m, "m (m+1 factors)")->capture_default_str();
    solve_cmd->add_option("--flags", sol.flags, "Reflection flags k_1..k_{m+1}")->capture_default_str();
    solve_cmd->add_option("--lambda-mode", sol.mode, "free or absorbed")->capture_default_str();
    solve_cmd->add_option("--init", sol.init, "Initial field constructor")->capture_default_str();
    solve_cmd->add_option("--weight", sol.weight, "Weight a (default 1)");
    solve_cmd->add_option("--tol", sol.tol, "Tolerance")->capture_default_str();
    solve_cmd->add_option("--max-iter", sol.max_iter, "Maximum iterations")->capture_default_str();
    solve_cmd->add_option("--res", sol.res, "Grid resolution")->capture_default_str();
    solve_cmd->add_option("--refine", sol.refine, "Extra refinement levels")->capture_default_str();
    add_common(solve_cmd);
    solve_cmd->callback([&] {
        chosen = solve_cmd;
        action = [&] {
            AdmissiblePair pair = classify(sol.d, sol.m);
            if (!pair.admissible()) throw NumericalRefusal("inadmissible " + pair.label());
            GridPtr grid = grid_for(sol.d, sol.res);
            std::optional<SphereField> weight;
            if (!sol.weight.empty()) weight = make_named_field(grid, sol.weight);
            ELProblem p(sol.m, parse_flags(sol.flags), make_named_field(grid, sol.init), parse_lambda_mode(sol.mode), weight,
                        sol.max_iter, sol.tol, sol.refine);
            ELReport rep = solve(p);
            Output o;
            o.result = rep.to_json(p);
            if (rep.status == "degenerate") o.status = kExitRefusal;
            return o;
        };
    });

    // ------------------------------------------------------------ holder
    struct {
        int d = 3, k = 3, res = 16, scales = 6, pairs = 200;
        std::string field = "const";
        std::vector<std::string> fields;
        double rmin = 0.0, rmax = 0.0, r0 = 0.5, gamma = 0.0;
        std::uint64_t seed = 1;
    } hol;
    CLI::App* holder = app.add_subcommand("holder", "Hoelder exponent fit for a convolution density");
    holder->add_option("--d", hol.d, "Dimension")->capture_default_str();
    holder->add_option("--k", hol.k, "Number of factors")->capture_default_str();
    holder->add_option("--res", hol.res, "Grid resolution")->capture_default_str();
    holder->add_option("--field", hol.field, "Factor constructor")->capture_default_str();
    holder->add_option("--fields", hol.fields, "One constructor per factor")->delimiter(';');
    holder->add_option("--rmin", hol.rmin, "Inner radius of the region")->capture_default_str();
    holder->add_option("--rmax", hol.rmax, "Outer radius (default: support radius)")->capture_default_str();
    holder->add_option("--r0", hol.r0, "Coarsest scale")->capture_default_str();
    holder->add_option("--scales", hol.scales, "Number of dyadic scales")->capture_default_str();
    holder->add_option("--pairs", hol.pairs, "Pairs per scale")->capture_default_str();
    holder->add_option("--gamma", hol.gamma, "Weight |x|^gamma (0: none)")->capture_default_str();
    holder->add_option("--seed", hol.seed, "Seed")->capture_default_str();
    add_common(holder);
    holder->callback([&] {
        chosen = holder;
        action = [&] {
            GridPtr grid = grid_for(hol.d, hol.res);
            if (hol.k < 2) throw ValidationError("--k must be at least 2");
            ConvDensity D(factor_list(grid, hol.field, hol.fields, hol.k));
            Region region{hol.rmin, hol.rmax > 0.0 ? hol.rmax : D.support_radius()};
            auto ladder = geometric_ladder(hol.r0, hol.scales);
            HolderFit fit = hol.gamma > 0.0 ? weighted_holder_probe(D, hol.gamma, region, ladder, hol.pairs, hol.seed)
                                            : holder_probe(D, region, ladder, hol.pairs, hol.seed);
            Output o;
            o.result = fit.to_json();
            std::ostringstream csv;
            fit.write_csv(csv);
            o.csv = csv.str();
            return o;
        };
    });

    // ------------------------------------------------------------ lognorm
    struct {
        int res = 8, kmax = 4;
        std::string field = "const";
    } lg;
    CLI::App* lognorm = app.add_subcommand("lognorm", "Logarithmic singularity of the four-fold circle density");
    lognorm->add_option("--res", lg.res, "Grid resolution")->capture_default_str();
    lognorm->add_option("--kmax", lg.kmax, "Radii 10^-1 .. 10^-kmax")->capture_default_str();
    lognorm->add_option("--field", lg.field, "Factor constructor")->capture_default_str();
    add_common(lognorm);
    lognorm->callback([&] {
        chosen = lognorm;
        action = [&] {
            GridPtr grid = grid_for(2, lg.res);
            ConvDensity D(std::vector<SphereField>(4, make_named_field(grid, lg.field)));
            LogSingularityRecord rec = log_singularity_probe(D, lg.kmax);
            Output o;
            o.result = rec.to_json();
            std::ostringstream csv;
            csv << "radius,value,ratio\n";
            char buf[128];
            for (std::size_t i = 0; i < rec.radii.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", rec.radii[i], rec.values[i], rec.ratios[i]);
                csv << buf;
            }
            o.csv = csv.str();
            return o;
        };
    });

    // ------------------------------------------------------------ smallness
    struct {
        double gamma = 1.0, s = 0.0;
        std::string x = "0.8,0.6";
        int kmin = 1, kmax = 8, refine = 0;
    } sm;
    CLI::App* small = app.add_subcommand("smallness", "Annulus and ball integrals of F(y)F(x-y) on the plane");
    small->add_option("--gamma", sm.gamma, "Weight exponent in (0,1]")->capture_default_str();
    small->add_option("--s", sm.s, "Loss parameter in the predicted exponents")->capture_default_str();
    small->add_option("--x", sm.x, "Point x1,x2")->capture_default_str();
    small->add_option("--kmin", sm.kmin, "Largest epsilon 2^-kmin")->capture_default_str();
    small->add_option("--kmax", sm.kmax, "Smallest epsilon 2^-kmax")->capture_default_str();
    small->add_option("--refine", sm.refine, "Extra refinement levels")->capture_default_str();
    add_common(small);
    small->callback([&] {
        chosen = small;
        action = [&] {
            if (sm.kmin < 1 || sm.kmax < sm.kmin) throw ValidationError("need 1 <= kmin <= kmax");
            std::vector<double> eps;
            for (int k = sm.kmin; k <= sm.kmax; ++k) eps.push_back(std::ldexp(1.0, -k));
            SmallnessRecord rec = smallness_probe(sm.gamma, parse_point(sm.x, 2), eps, sm.s, sm.refine);
            Output o;
            o.result = rec.to_json();
            std::ostringstream csv;
            csv << "epsilon,annulus,ball\n";
            char buf[128];
            for (std::size_t i = 0; i < rec.epsilons.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", rec.epsilons[i], rec.annulus[i], rec.ball[i]);
                csv << buf;
            }
            o.csv = csv.str();
            return o;
        };
    });

    // ------------------------------------------------------------ norms
    struct {
        int d = 3, res = 16, kmax = 12;
        std::string field = "linear:1", family = "first";
        double s = 0.5;
        bool equivalence = false;
    } nm;
    CLI::App* norms = app.add_subcommand("norms", "Difference-norm estimates of a field");
    norms->add_option("--d", nm.d, "Dimension")->capture_default_str();
    norms->add_option("--res", nm.res, "Grid resolution")->capture_default_str();
    norms->add_option("--field", nm.field, "Field constructor")->capture_default_str();
    norms->add_option("--family", nm.family, "first, second or integer")->capture_default_str();
    norms->add_option("--s", nm.s, "Smoothness index")->capture_default_str();
    norms->add_option("--kmax", nm.kmax, "Ladder t = 2^-k, k = 0..kmax")->capture_default_str();
    norms->add_flag("--equivalence", nm.equivalence, "Compare first and second differences at s");
    add_common(norms);
    norms->callback([&] {
        chosen = norms;
        action = [&] {
            SphereField f = make_named_field(grid_for(nm.d, nm.res), nm.field);
            Output o;
            if (nm.equivalence) {
                o.result = difference_equivalence_check(f, nm.s, nm.kmax).to_json();
                return o;
            }
            NormEstimate e = norm_estimate(f, parse_norm_family(nm.family), nm.s, nm.kmax);
            o.result = e.to_json();
            if (!e.differences.empty() && !e.differences[0].empty()) {
                std::ostringstream csv;
                csv << "t";
                for (const auto& l : e.labels) csv << "," << l;
                csv << "\n";
                char buf[64];
                for (std::size_t c = 0; c < e.ladder.size(); ++c) {
                    std::snprintf(buf, sizeof buf, "%.17g", e.ladder[c]);
                    csv << buf;
                    for (const auto& row : e.differences) {
                        std::snprintf(buf, sizeof buf, ",%.17g", row[c]);
                        csv << buf;
                    }
                    csv << "\n";
                }
                o.csv = csv.str();
            }
            return o;
        };
    });

    // ------------------------------------------------------------ smoothing
    struct {
        int d = 3, m = 2, res = 16, samples = 50;
        double s = 0.2;
        std::string phi = "const";
        std::uint64_t seed = 1;
    } smo;
    CLI::App* smoothing = app.add_subcommand("smoothing", "Smoothing gain of L[phi](g) over random unit fields");
    smoothing->add_option("--d", smo.d, "Dimension")->capture_default_str();
    smoothing->add_option("--m", smo.m, "Number of fixed factors phi")->capture_default_str();
    smoothing->add_option("--s", smo.s, "Smoothness index in (0,1)")->capture_default_str();
    smoothing->add_option("--res", smo.res, "Base resolution (also run at twice it)")->capture_default_str();
    smoothing->add_option("--samples", smo.samples, "Random fields per resolution")->capture_default_str();
    smoothing->add_option("--phi", smo.phi, "Constructor for every phi")->capture_default_str();
    smoothing->add_option("--seed", smo.seed, "Seed")->capture_default_str();
    add_common(smoothing);
    smoothing->callback([&] {
        chosen = smoothing;
        action = [&] {
            GridPtr fine = grid_for(smo.d, 2 * smo.res);
            SphereField phi_field = make_named_field(fine, smo.phi);
            std::function<cplx(const Vec3&)> phi_fn = [phi_field](const Vec3& w) { return phi_field(w); };
            std::vector<std::function<cplx(const Vec3&)>> phis(smo.m, phi_fn);
            Output o;
            o.result = smoothing_probe(phis, smo.d, smo.s, smo.res, smo.samples, smo.seed).to_json();
            return o;
        };
    });

    // ------------------------------------------------------------ stability
    struct {
        int d = 3, m = 2, max_iter = 200;
        std::string flags = "010", mode = "free", init = "const+0.1*linear:1";
        std::vector<int> resolutions{16, 32, 48};
        std::vector<double> s_values{0.25, 0.5, 0.75};
        double tol = 1e-10;
    } st;
    CLI::App* stability = app.add_subcommand("stability", "Refinement stability of Euler-Lagrange solutions");
    stability->add_option("--d", st.d, "Dimension")->capture_default_str();
    stability->add_option("--m", st.m, "m (m+1 factors)")->capture_default_str();
    stability->add_option("--flags", st.flags, "Reflection flags")->capture_default_str();
    stability->add_option("--lambda-mode", st.mode, "free or absorbed")->capture_default_str();
    stability->add_option("--init", st.init, "Initial field constructor")->capture_default_str();
    stability->add_option("--res", st.resolutions, "Resolution ladder")->delimiter(',')->capture_default_str();
    stability->add_option("--s", st.s_values, "Smoothness indices")->delimiter(',')->capture_default_str();
    stability->add_option("--tol", st.tol, "Tolerance")->capture_default_str();
    stability->add_option("--max-iter", st.max_iter, "Maximum iterations")->capture_default_str();
    add_common(stability);
    stability->callback([&] {
        chosen = stability;
        action = [&] {
            if (st.resolutions.empty()) throw ValidationError("empty resolution ladder");
            GridPtr grid = grid_for(st.d, st.resolutions.front());
            ELProblem p(st.m, parse_flags(st.flags), make_named_field(grid, st.init), parse_lambda_mode(st.mode),
                        std::nullopt, st.max_iter, st.tol);
            Output o;
            o.result = refinement_stability(p, st.resolutions, st.s_values).to_json();
            return o;
        };
    });

    // ------------------------------------------------------------ oracle
    struct {
        int d = 3, k = 2, res = 16;
        std::string g = "one", field = "const";
        std::size_t samples = 1000000;
        std::uint64_t seed = 1;
        double crosscheck = 0.0;
        std::vector<double> potential;
    } orc;
    CLI::App* oracle = app.add_subcommand("oracle", "Monte Carlo moments and closed-form oracles");
    oracle->add_option("--d", orc.d, "Dimension (any d >= 2 for constant factors)")->capture_default_str();
    oracle->add_option("--k", orc.k, "Number of factors")->capture_default_str();
    oracle->add_option("--g", orc.g, "Test function: one, x1, r2, gauss")->capture_default_str();
    oracle->add_option("--samples", orc.samples, "Monte Carlo samples")->capture_default_str();
    oracle->add_option("--seed", orc.seed, "Seed")->capture_default_str();
    oracle->add_option("--field", orc.field, "Factor constructor (d in {2,3})")->capture_default_str();
    oracle->add_option("--res", orc.res, "Grid resolution for --field")->capture_default_str();
    oracle->add_option("--crosscheck", orc.crosscheck, "Compare with density quadrature at this relative tolerance");
    oracle->add_option("--potential", orc.potential, "Radii for the single-layer potential oracle")->delimiter(',');
    add_common(oracle);
    oracle->callback([&] {
        chosen = oracle;
        action = [&] {
            Output o;
            if (!orc.potential.empty()) {
                json rows = json::array();
                for (double r : orc.potential) {
                    PotentialValue v = potential_oracle(r);
                    rows.push_back({{"r", r}, {"closed_form", v.closed_form}, {"quadrature", v.quadrature}, {"agrees", v.agrees()}});
                }
                o.result["potential"] = rows;
            }
            TestFunction g = builtin_test_function(orc.g);
            if (orc.d >= 4) {
                if (orc.field != "const") throw ValidationError("d >= 4 supports constant factors only");
                o.result["moment"] =
                    mc_moment(orc.d, orc.k, [](int, const double*) { return cplx(1.0); }, g, orc.samples, orc.seed).to_json();
                return o;
            }
            GridPtr grid = grid_for(orc.d, orc.res);
            std::vector<SphereField> factors(orc.k, make_named_field(grid, orc.field));
            if (orc.crosscheck > 0.0) {
                if (orc.k < 2) throw ValidationError("the crosscheck needs k >= 2");
                o.result["crosscheck"] = moment_crosscheck(ConvDensity(factors), g, orc.crosscheck, orc.samples, orc.seed).to_json();
            } else {
                o.result["moment"] = mc_moment(factors, g, orc.samples, orc.seed).to_json();
            }
            return o;
        };
    });

    auto diagnostic = [&](const char* kind, const std::string& message, int code) {
        json d{{"tool", "sconv"}, {"version", SCONV_VERSION}, {"status", "error"}, {"kind", kind}, {"message", message},
               {"exit_code", code}};
        if (chosen) d["command"] = chosen->get_name();
        std::cerr << d.dump(2) << "\n";
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return diagnostic("validation", e.what(), kExitValidation);
    }
    if (common.threads > 0) set_thread_count(common.threads);
    try {
        Output o = action();
        json config = resolved_config(chosen);
        config["threads"] = common.threads;
        if (common.format == "csv") {
            if (o.csv.empty()) throw ValidationError(chosen->get_name() + " has no CSV form");
            emit(csv_header(chosen->get_name(), config) + o.csv, common.out);
        } else {
            json doc{{"tool", "sconv"},     {"version", SCONV_VERSION}, {"command", chosen->get_name()},
                     {"config", config},    {"result", o.result},       {"status", o.status == 0 ? "ok" : "refused"}};
            emit(doc.dump(2) + "\n", common.out);
        }
        if (o.status != 0) return diagnostic("refusal", "degenerate iterate: lambda = 0 forces f = 0", o.status);
        return 0;
    } catch (const ValidationError& e) {
        return diagnostic("validation", e.what(), kExitValidation);
    } catch (const NumericalRefusal& e) {
        return diagnostic("refusal", e.what(), kExitRefusal);
    } catch (const json::exception& e) {
        return diagnostic("validation", e.what(), kExitValidation);
    } catch (const std::exception& e) {
        return diagnostic("internal", e.what(), 1);
    }
}
