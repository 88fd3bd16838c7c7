#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sconv/types.hpp"

namespace sconv {

// Quadrature grid on S^{d-1}, d in {2, 3}.
//   d = 2: N equispaced angles (N even), trigonometric interpolation.
//   d = 3: L Gauss-Legendre latitudes x 2L equispaced longitudes, interpolation
//          through spherical harmonics of degree <= L-1 with a nodal fallback.
class SphereGrid {
public:
    static std::shared_ptr<const SphereGrid> make(int d, int resolution);

    int dim() const { return dim_; }
    int resolution() const { return resolution_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const Vec3& node(std::size_t i) const { return nodes_[i]; }
    std::size_t antipode(std::size_t i) const;
    std::string scheme() const { return dim_ == 2 ? "trigonometric" : "gauss-legendre-harmonic"; }
    // Highest degree reproduced exactly by interpolation (and by quadrature
    // of products of two such functions).
    int band_limit() const { return dim_ == 2 ? resolution_ / 2 - 1 : resolution_ - 1; }

    int nlat() const { return nlat_; }
    int nlon() const { return nlon_; }
    const std::vector<double>& lat_x() const { return lat_x_; }
    const std::vector<double>& lat_w() const { return lat_w_; }
    const std::vector<double>& bary() const { return bary_; }
    // Normalised associated Legendre values at each latitude (d = 3).
    const double* legendre_at(int lat) const { return legendre_.data() + lat * legendre_stride_; }

    bool same_as(const SphereGrid& other) const { return dim_ == other.dim_ && resolution_ == other.resolution_; }

private:
    SphereGrid() = default;
    int dim_ = 0, resolution_ = 0, nlat_ = 0, nlon_ = 0;
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    std::vector<double> lat_x_, lat_w_, bary_;
    std::vector<double> legendre_;
    std::size_t legendre_stride_ = 0;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

// Complex samples on a grid together with their spectral representation.
class SphereField {
public:
    SphereField() = default;
    SphereField(GridPtr grid, std::vector<cplx> values);

    static SphereField constant(GridPtr grid, cplx value);
    static SphereField from_function(GridPtr grid, const std::function<cplx(const Vec3&)>& f);

    const GridPtr& grid() const { return grid_; }
    int dim() const { return grid_->dim(); }
    const std::vector<cplx>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    const cplx& operator[](std::size_t i) const { return values_[i]; }

    // Interpolated value at a unit vector.
    cplx operator()(const Vec3& p) const;
    // Effective degree: highest harmonic with coefficient above round-off.
    int degree() const { return degree_; }
    // True when the truncated expansion reproduces every nodal value.
    bool band_limited() const { return band_limited_; }
    // d = 2: coefficients of e^{i n t}, n = -N/2+1 .. N/2 stored at n + N/2 - 1
    // (the last entry multiplies cos(N t / 2)). d = 3: harmonic coefficients.
    const std::vector<cplx>& coefficients() const { return coeffs_; }

    SphereField operator+(const SphereField& o) const;
    SphereField operator-(const SphereField& o) const;
    SphereField operator*(const SphereField& o) const;
    SphereField scaled(cplx s) const;
    SphereField conj() const;

private:
    void analyse();
    cplx eval_nodal(const Vec3& p) const;

    GridPtr grid_;
    std::vector<cplx> values_;
    std::vector<cplx> coeffs_;
    std::vector<cplx> lat_modes_;  // nodal fallback (d = 3), per longitude mode and latitude
    int degree_ = 0;
    bool band_limited_ = true;
};

// Rotation e^{t X_{i,j}}: rotates the (x_i, x_j) coordinates by angle t.
struct RotationFlow {
    int i = 1, j = 2;
    double t = 0.0;
    std::array<std::array<double, 3>, 3> matrix(int d) const;
};

using Mat3 = std::array<std::array<double, 3>, 3>;
Mat3 identity3();
Mat3 compose(const Mat3& a, const Mat3& b);  // a * b
Vec3 apply(const Mat3& m, const Vec3& v);
// Operator 2-norm of a d x d matrix (leading block of m).
double operator_norm(const Mat3& m, int d);

// g(w) = f(Theta w) at every node.
SphereField apply_rotation(const RotationFlow& flow, const SphereField& f);
SphereField apply_rotation(const Mat3& theta, const SphereField& f);

// g(w) = conj(f(-w)).
SphereField conjugate_reflection(const SphereField& f);

// sum w_i f_i conj(g_i).
cplx inner_product(const SphereField& f, const SphereField& g);
double l2_norm(const SphereField& f);
cplx integral(const SphereField& f);

// order 1: f o e^{tX} - f ; order 2: f o e^{2tX} - 2 f o e^{tX} + f.
SphereField flow_difference(const SphereField& f, const RotationFlow& flow, int order);

// Derivative along the flow generator X_{i,j}, exact for band-limited fields.
SphereField flow_derivative(const SphereField& f, int i, int j);

// Generators (i, j), 1 <= i < j <= d.
std::vector<std::pair<int, int>> generators(int d);

// Random rotation as a product of flows with angles drawn from `angles`.
Mat3 euler_rotation(int d, double a, double b, double c);

}  // namespace sconv
