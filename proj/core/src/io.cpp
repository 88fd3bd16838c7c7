#include "sconv/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "sconv/harmonics.hpp"

namespace sconv {

json field_to_json(const SphereField& f) {
    const auto& g = *f.grid();
    json nodes = json::array(), weights = json::array(), re = json::array(), im = json::array();
    for (std::size_t i = 0; i < g.size(); ++i) {
        json p = json::array();
        for (int k = 0; k < g.dim(); ++k) p.push_back(g.node(i)[k]);
        nodes.push_back(p);
        weights.push_back(g.weights()[i]);
        re.push_back(f[i].real());
        im.push_back(f[i].imag());
    }
    return json{{"dim", g.dim()}, {"resolution", g.resolution()}, {"nodes", nodes},
                {"weights", weights}, {"values_re", re}, {"values_im", im}};
}

SphereField field_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("field document must be a JSON object");
    for (const char* key : {"dim", "resolution", "nodes", "weights", "values_re", "values_im"})
        if (!j.contains(key)) throw ValidationError(std::string("field document lacks '") + key + "'");
    int d = j.at("dim").get<int>();
    int res = j.at("resolution").get<int>();
    if (d != 2 && d != 3) throw ValidationError("dim must be 2 or 3");
    GridPtr g = SphereGrid::make(d, res);
    const auto& re = j.at("values_re");
    const auto& im = j.at("values_im");
    if (!re.is_array() || !im.is_array() || re.size() != g->size() || im.size() != g->size())
        throw ValidationError("values_re/values_im must hold " + std::to_string(g->size()) + " numbers");
    if (j.contains("nodes")) {
        const auto& nodes = j.at("nodes");
        if (!nodes.is_array() || nodes.size() != g->size()) throw ValidationError("node count does not match the grid");
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (!nodes[i].is_array() || int(nodes[i].size()) != d) throw ValidationError("node with wrong dimension");
            for (int k = 0; k < d; ++k)
                if (std::abs(nodes[i][k].get<double>() - g->node(i)[k]) > 1e-12)
                    throw ValidationError("node " + std::to_string(i) + " does not match the grid layout");
        }
    }
    if (j.contains("weights")) {
        const auto& w = j.at("weights");
        if (!w.is_array() || w.size() != g->size()) throw ValidationError("weight count does not match the grid");
        for (std::size_t i = 0; i < g->size(); ++i)
            if (std::abs(w[i].get<double>() - g->weights()[i]) > 1e-12)
                throw ValidationError("weight " + std::to_string(i) + " does not match the grid");
    }
    std::vector<cplx> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
        if (!re[i].is_number() || !im[i].is_number()) throw ValidationError("non-numeric field value");
        v[i] = cplx(re[i].get<double>(), im[i].get<double>());
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) throw ValidationError("non-finite field value");
    }
    return SphereField(g, std::move(v));
}

SphereField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
    return field_from_json(j);
}

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& atom) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ValidationError("bad number '" + item + "' in '" + atom + "'");
        }
        if (used != item.size()) throw ValidationError("bad number '" + item + "' in '" + atom + "'");
        out.push_back(v);
    }
    return out;
}

SphereField atom_field(const GridPtr& grid, const std::string& atom) {
    const int d = grid->dim();
    auto colon = atom.find(':');
    std::string name = atom.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : atom.substr(colon + 1);
    if (name == "file") {
        SphereField f = load_field(args);
        if (!f.grid()->same_as(*grid)) throw ValidationError("field file does not match the requested grid");
        return SphereField(grid, f.values());
    }
    std::vector<double> a = args.empty() ? std::vector<double>{} : parse_numbers(args, atom);
    auto need = [&](std::size_t n) {
        if (a.size() != n) throw ValidationError("'" + name + "' expects " + std::to_string(n) + " parameter(s)");
    };
    if (name == "const") {
        if (a.size() > 1) need(1);
        return SphereField::constant(grid, a.empty() ? 1.0 : a[0]);
    }
    if (name == "linear") {
        need(1);
        int i = int(a[0]);
        if (i < 1 || i > d || a[0] != i) throw ValidationError("linear:i needs 1 <= i <= d");
        return SphereField::from_function(grid, [i](const Vec3& w) { return cplx(w[i - 1]); });
    }
    if (name == "harmonic") {
        if (d == 2) {
            need(1);
            int n = int(a[0]);
            if (a[0] != n || std::abs(n) > grid->band_limit()) throw ValidationError("harmonic:n outside the band limit");
            return SphereField::from_function(grid, [n](const Vec3& w) { return std::polar(1.0, n * std::atan2(w[1], w[0])); });
        }
        need(2);
        int l = int(a[0]), m = int(a[1]);
        if (a[0] != l || a[1] != m || l < 0 || std::abs(m) > l || l > grid->band_limit())
            throw ValidationError("harmonic:l,m needs |m| <= l <= band limit");
        std::vector<cplx> c(sh_count(l));
        c[sh_index(l, m)] = 1.0;
        return SphereField::from_function(grid, [c, l](const Vec3& w) { return sh_synthesize(c.data(), l, w); });
    }
    if (name == "hemisphere") {
        need(0);
        return SphereField::from_function(grid, [d](const Vec3& w) {
            double z = w[d - 1];
            return cplx(z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : 0.5));
        });
    }
    if (name == "lipschitz-bump") {
        need(2);
        Vec3 c = d == 2 ? Vec3{std::cos(a[0]), std::sin(a[0]), 0.0} : Vec3{std::sin(a[0]), 0.0, std::cos(a[0])};
        double h = a[1];
        return SphereField::from_function(grid, [c, h](const Vec3& w) { return cplx(1.0 + h * std::max(0.0, 1.0 - norm(w - c))); });
    }
    throw ValidationError("unknown field constructor '" + name + "'");
}

}  // namespace

SphereField make_named_field(const GridPtr& grid, const std::string& expr) {
    if (expr.empty()) throw ValidationError("empty field constructor");
    std::vector<std::string> terms;
    std::string current;
    for (std::size_t i = 0; i < expr.size(); ++i) {
        char ch = expr[i];
        // '+' separates terms unless it belongs to an exponent such as 1e+3
        bool exponent = i > 0 && (expr[i - 1] == 'e' || expr[i - 1] == 'E') && !current.empty() &&
                        std::isdigit(static_cast<unsigned char>(current[0]));
        if (ch == '+' && !exponent) {
            terms.push_back(current);
            current.clear();
        } else {
            current += ch;
        }
    }
    terms.push_back(current);
    SphereField total;
    for (const std::string& term : terms) {
        if (term.empty()) throw ValidationError("empty term in '" + expr + "'");
        cplx coef(1.0);
        std::string atom = term;
        auto star = term.find('*');
        if (star != std::string::npos) {
            coef = parse_numbers(term.substr(0, star), term)[0];
            atom = term.substr(star + 1);
        }
        SphereField f = atom_field(grid, atom).scaled(coef);
        total = total.grid() ? total + f : f;
    }
    return total;
}

void save_field(const SphereField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << field_to_json(f).dump() << '\n';
}

}  // namespace sconv
