#pragma once

#include <string>

#include <json.hpp>

#include "sconv/sphere.hpp"

namespace sconv {

using json = nlohmann::json;

// {dim, resolution, nodes, weights, values_re, values_im}
json field_to_json(const SphereField& f);
// Rebuilds the grid from dim/resolution and checks nodes, weights and counts
// against it. Throws ValidationError on any mismatch.
SphereField field_from_json(const json& j);

SphereField load_field(const std::string& path);

// Field from a constructor expression: terms joined by '+', each an optional
// "coef*" prefix and one of
//   const[:c]  harmonic:l,m (S^2) or harmonic:n (S^1, e^{in t})  linear:i
//   hemisphere  lipschitz-bump:center,height  file:path
// lipschitz-bump is 1 + height * max(0, 1 - |w - c|) with c at polar angle
// `center` in the (x1, x_d) plane.
SphereField make_named_field(const GridPtr& grid, const std::string& expr);
void save_field(const SphereField& f, const std::string& path);

}  // namespace sconv
