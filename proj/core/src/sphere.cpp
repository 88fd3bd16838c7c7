#include "sconv/sphere.hpp"

#include <Eigen/Dense>

#include <algorithm>

#include "sconv/harmonics.hpp"
#include "sconv/parallel.hpp"
#include "sconv/quadrature.hpp"

namespace sconv {

namespace {
constexpr double kDegreeTol = 1e-13;
constexpr double kReconstructTol = 1e-10;
}  // namespace

void perpendicular_frame(const Vec3& u, Vec3& e1, Vec3& e2) {
    Vec3 a{0.0, 0.0, 0.0};
    int k = 0;
    for (int c = 1; c < 3; ++c)
        if (std::abs(u[c]) < std::abs(u[k])) k = c;
    a[k] = 1.0;
    Vec3 v = a - dot(a, u) * u;
    e1 = (1.0 / norm(v)) * v;
    e2 = cross(u, e1);
}

// ---------------------------------------------------------------- grid

std::shared_ptr<const SphereGrid> SphereGrid::make(int d, int resolution) {
    if (d != 2 && d != 3) throw ValidationError("grids exist only for d = 2 and d = 3");
    if (resolution < 8) throw ValidationError("resolution must be at least 8");
    std::shared_ptr<SphereGrid> g(new SphereGrid());
    g->dim_ = d;
    g->resolution_ = resolution;
    if (d == 2) {
        if (resolution % 2 != 0) throw ValidationError("d = 2 grids need an even node count");
        int n = resolution;
        g->nodes_.resize(n);
        g->weights_.assign(n, 2.0 * M_PI / n);
        for (int j = 0; j < n; ++j) {
            double t = 2.0 * M_PI * j / n;
            g->nodes_[j] = {std::cos(t), std::sin(t), 0.0};
        }
        // exact antipodes
        for (int j = n / 2; j < n; ++j) g->nodes_[j] = {-g->nodes_[j - n / 2][0], -g->nodes_[j - n / 2][1], 0.0};
        return g;
    }
    int L = resolution;
    g->nlat_ = L;
    g->nlon_ = 2 * L;
    Rule gl = gauss_legendre(L);
    g->lat_x_ = gl.x;
    g->lat_w_ = gl.w;
    g->bary_.resize(L);
    for (int i = 0; i < L; ++i) g->bary_[i] = ((i % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - gl.x[i] * gl.x[i]) * gl.w[i]);
    g->nodes_.resize(std::size_t(L) * 2 * L);
    g->weights_.resize(g->nodes_.size());
    std::vector<double> cs(2 * L), sn(2 * L);
    for (int j = 0; j < 2 * L; ++j) {
        double p = M_PI * j / L;
        cs[j] = std::cos(p);
        sn[j] = std::sin(p);
    }
    for (int j = L; j < 2 * L; ++j) {
        cs[j] = -cs[j - L];
        sn[j] = -sn[j - L];
    }
    for (int i = 0; i < L; ++i) {
        double x = gl.x[i], s = std::sqrt(1.0 - x * x);
        for (int j = 0; j < 2 * L; ++j) {
            std::size_t k = std::size_t(i) * 2 * L + j;
            g->nodes_[k] = {s * cs[j], s * sn[j], x};
            g->weights_[k] = gl.w[i] * M_PI / L;
        }
    }
    g->legendre_stride_ = legendre_index(L - 1, L - 1) + 1;
    g->legendre_.resize(g->legendre_stride_ * L);
    for (int i = 0; i < L; ++i) {
        double x = gl.x[i];
        legendre_all(L - 1, x, std::sqrt(1.0 - x * x), g->legendre_.data() + i * g->legendre_stride_);
    }
    return g;
}

std::size_t SphereGrid::antipode(std::size_t k) const {
    if (dim_ == 2) return (k + resolution_ / 2) % resolution_;
    std::size_t i = k / nlon_, j = k % nlon_;
    return (nlat_ - 1 - i) * nlon_ + (j + nlat_) % nlon_;
}

// ---------------------------------------------------------------- field

SphereField::SphereField(GridPtr grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ValidationError("field without grid");
    if (values_.size() != grid_->size()) throw ValidationError("value count does not match node count");
    analyse();
}

SphereField SphereField::constant(GridPtr grid, cplx value) {
    std::size_t n = grid->size();
    return SphereField(std::move(grid), std::vector<cplx>(n, value));
}

SphereField SphereField::from_function(GridPtr grid, const std::function<cplx(const Vec3&)>& f) {
    std::vector<cplx> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
    return SphereField(std::move(grid), std::move(v));
}

void SphereField::analyse() {
    const SphereGrid& g = *grid_;
    double vmax = 0.0;
    for (const cplx& v : values_) vmax = std::max(vmax, std::abs(v));
    if (g.dim() == 2) {
        int n = g.resolution();
        coeffs_.assign(n, cplx(0.0));
        for (int k = 0; k < n; ++k) {
            int freq = k - n / 2 + 1;
            cplx acc(0.0);
            for (int j = 0; j < n; ++j) {
                long long ph = (static_cast<long long>(freq) * j) % n;
                double t = -2.0 * M_PI * double(ph) / n;
                acc += values_[j] * cplx(std::cos(t), std::sin(t));
            }
            coeffs_[k] = acc / double(n);
        }
        double total = 0.0;
        for (const cplx& c : coeffs_) total += std::norm(c);
        total = std::sqrt(total);
        degree_ = 0;
        for (int k = 0; k < n; ++k)
            if (std::abs(coeffs_[k]) > kDegreeTol * total) degree_ = std::max(degree_, std::abs(k - n / 2 + 1));
        band_limited_ = true;
        return;
    }
    int L = g.nlat(), M = g.nlon();
    // longitude transform, a_i(m) = (1/M) sum_j f_ij e^{-i m phi_j}, m = -L+1..L
    std::vector<cplx> tw(M);
    for (int j = 0; j < M; ++j) tw[j] = cplx(std::cos(2.0 * M_PI * j / M), -std::sin(2.0 * M_PI * j / M));
    std::vector<cplx> a(std::size_t(2 * L) * L);  // index (m + L - 1) * L + i
    for (int i = 0; i < L; ++i) {
        const cplx* row = values_.data() + std::size_t(i) * M;
        for (int m = -L + 1; m <= L; ++m) {
            cplx acc(0.0);
            int mm = ((m % M) + M) % M;
            for (int j = 0; j < M; ++j) acc += row[j] * tw[(std::size_t(mm) * j) % M];
            a[std::size_t(m + L - 1) * L + i] = acc / double(M);
        }
    }
    int D = L - 1;
    coeffs_.assign(sh_count(D), cplx(0.0));
    for (int m = -D; m <= D; ++m) {
        int am = std::abs(m);
        const cplx* am_row = a.data() + std::size_t(m + L - 1) * L;
        for (int l = am; l <= D; ++l) {
            cplx acc(0.0);
            for (int i = 0; i < L; ++i) acc += g.lat_w()[i] * g.legendre_at(i)[legendre_index(l, am)] * am_row[i];
            coeffs_[sh_index(l, m)] = 2.0 * M_PI * acc;
        }
    }
    std::vector<double> energy(D + 1, 0.0);
    double total = 0.0;
    for (int l = 0; l <= D; ++l) {
        for (int m = -l; m <= l; ++m) energy[l] += std::norm(coeffs_[sh_index(l, m)]);
        total += energy[l];
    }
    degree_ = 0;
    for (int l = 0; l <= D; ++l)
        if (std::sqrt(energy[l]) > kDegreeTol * std::sqrt(total)) degree_ = l;
    coeffs_.resize(sh_count(degree_));
    // does the truncated expansion reproduce the samples?
    double err = 0.0;
    std::vector<cplx> gm(2 * degree_ + 1);
    for (int i = 0; i < L && err <= kReconstructTol * vmax; ++i) {
        const double* P = g.legendre_at(i);
        for (int m = -degree_; m <= degree_; ++m) {
            cplx acc(0.0);
            for (int l = std::abs(m); l <= degree_; ++l) acc += coeffs_[sh_index(l, m)] * P[legendre_index(l, std::abs(m))];
            gm[m + degree_] = acc;
        }
        for (int j = 0; j < M; ++j) {
            cplx v(0.0);
            for (int m = -degree_; m <= degree_; ++m) v += gm[m + degree_] * std::conj(tw[(std::size_t(((m % M) + M) % M) * j) % M]);
            err = std::max(err, std::abs(v - values_[std::size_t(i) * M + j]));
        }
    }
    band_limited_ = err <= kReconstructTol * vmax;
    if (!band_limited_) {
        degree_ = D;
        lat_modes_ = std::move(a);
        for (int m = -L + 1; m <= L; ++m) {
            if (std::abs(m) % 2 == 0) continue;
            for (int i = 0; i < L; ++i) {
                double x = g.lat_x()[i];
                lat_modes_[std::size_t(m + L - 1) * L + i] /= std::sqrt(1.0 - x * x);
            }
        }
    }
}

cplx SphereField::eval_nodal(const Vec3& p) const {
    const SphereGrid& g = *grid_;
    int L = g.nlat();
    double x = std::clamp(p[2], -1.0, 1.0);
    double s = std::hypot(p[0], p[1]);
    std::vector<double> ell(L, 0.0);
    int hit = -1;
    for (int i = 0; i < L; ++i)
        if (x == g.lat_x()[i]) hit = i;
    if (hit >= 0) {
        ell[hit] = 1.0;
    } else {
        double den = 0.0;
        for (int i = 0; i < L; ++i) {
            ell[i] = g.bary()[i] / (x - g.lat_x()[i]);
            den += ell[i];
        }
        for (int i = 0; i < L; ++i) ell[i] /= den;
    }
    cplx e = s > 1e-300 ? cplx(p[0] / s, p[1] / s) : cplx(1.0, 0.0);
    cplx total(0.0);
    cplx ep(1.0), en(1.0);
    for (int m = 0; m <= L; ++m) {
        double sp = (m % 2) ? s : 1.0;
        auto mode = [&](int mm) {
            const cplx* row = lat_modes_.data() + std::size_t(mm + L - 1) * L;
            cplx acc(0.0);
            for (int i = 0; i < L; ++i) acc += ell[i] * row[i];
            return acc * sp;
        };
        if (m == 0) {
            total += mode(0);
        } else if (m < L) {
            total += ep * mode(m) + en * mode(-m);
        } else {
            total += 0.5 * (ep + en) * mode(L);
        }
        ep *= e;
        en *= std::conj(e);
    }
    return total;
}

cplx SphereField::operator()(const Vec3& p) const {
    const SphereGrid& g = *grid_;
    if (g.dim() == 2) {
        int n = g.resolution();
        double r = std::hypot(p[0], p[1]);
        cplx e = r > 0 ? cplx(p[0] / r, p[1] / r) : cplx(1.0, 0.0);
        int D = std::min(degree_, n / 2 - 1);
        cplx total = coeffs_[n / 2 - 1];
        cplx ep = 1.0;
        for (int k = 1; k <= D; ++k) {
            ep *= e;
            total += coeffs_[n / 2 - 1 + k] * ep + coeffs_[n / 2 - 1 - k] * std::conj(ep);
        }
        if (degree_ >= n / 2) {
            ep *= e;
            total += coeffs_[n - 1] * ep.real();
        }
        return total;
    }
    if (band_limited_) return sh_synthesize(coeffs_.data(), degree_, p);
    return eval_nodal(p);
}

namespace {
void check_same(const SphereField& a, const SphereField& b) {
    if (!a.grid() || !b.grid() || !a.grid()->same_as(*b.grid())) throw ValidationError("fields live on different grids");
}
}  // namespace

SphereField SphereField::operator+(const SphereField& o) const {
    check_same(*this, o);
    std::vector<cplx> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
    return SphereField(grid_, std::move(v));
}

SphereField SphereField::operator-(const SphereField& o) const {
    check_same(*this, o);
    std::vector<cplx> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
    return SphereField(grid_, std::move(v));
}

SphereField SphereField::operator*(const SphereField& o) const {
    check_same(*this, o);
    std::vector<cplx> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= o.values_[i];
    return SphereField(grid_, std::move(v));
}

SphereField SphereField::scaled(cplx s) const {
    std::vector<cplx> v(values_);
    for (cplx& x : v) x *= s;
    return SphereField(grid_, std::move(v));
}

SphereField SphereField::conj() const {
    std::vector<cplx> v(values_);
    for (cplx& x : v) x = std::conj(x);
    return SphereField(grid_, std::move(v));
}

// ---------------------------------------------------------------- rotations

Mat3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Mat3 RotationFlow::matrix(int d) const {
    if (!(1 <= i && i < j && j <= d)) throw ValidationError("flow generator needs 1 <= i < j <= d");
    Mat3 m = identity3();
    double c = std::cos(t), s = std::sin(t);
    m[i - 1][i - 1] = c;
    m[i - 1][j - 1] = -s;
    m[j - 1][i - 1] = s;
    m[j - 1][j - 1] = c;
    return m;
}

Mat3 compose(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Vec3 apply(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2], m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

double operator_norm(const Mat3& m, int d) {
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = m[i][j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

Mat3 euler_rotation(int d, double a, double b, double c) {
    if (d == 2) return RotationFlow{1, 2, a}.matrix(2);
    return compose(compose(RotationFlow{1, 2, a}.matrix(3), RotationFlow{1, 3, b}.matrix(3)), RotationFlow{1, 2, c}.matrix(3));
}

SphereField apply_rotation(const Mat3& theta, const SphereField& f) {
    const SphereGrid& g = *f.grid();
    std::vector<cplx> v(g.size());
    parallel_for(g.size(), [&](std::size_t k) { v[k] = f(apply(theta, g.node(k))); });
    return SphereField(f.grid(), std::move(v));
}

SphereField apply_rotation(const RotationFlow& flow, const SphereField& f) {
    Mat3 m = flow.matrix(f.dim());
    if (flow.t == 0.0) return f;
    return apply_rotation(m, f);
}

SphereField conjugate_reflection(const SphereField& f) {
    const SphereGrid& g = *f.grid();
    std::vector<cplx> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) v[k] = std::conj(f[g.antipode(k)]);
    return SphereField(f.grid(), std::move(v));
}

cplx inner_product(const SphereField& f, const SphereField& g) {
    check_same(f, g);
    const auto& w = f.grid()->weights();
    cplx acc(0.0);
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f[k] * std::conj(g[k]);
    return acc;
}

double l2_norm(const SphereField& f) { return std::sqrt(std::max(0.0, inner_product(f, f).real())); }

cplx integral(const SphereField& f) {
    const auto& w = f.grid()->weights();
    cplx acc(0.0);
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f[k];
    return acc;
}

SphereField flow_difference(const SphereField& f, const RotationFlow& flow, int order) {
    if (order != 1 && order != 2) throw ValidationError("difference order must be 1 or 2");
    flow.matrix(f.dim());
    SphereField once = apply_rotation(flow, f);
    if (order == 1) return once - f;
    SphereField twice = apply_rotation(RotationFlow{flow.i, flow.j, 2.0 * flow.t}, f);
    std::vector<cplx> v(f.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = twice[k] - 2.0 * once[k] + f[k];
    return SphereField(f.grid(), std::move(v));
}

SphereField flow_derivative(const SphereField& f, int i, int j) {
    const SphereGrid& g = *f.grid();
    RotationFlow{i, j, 0.0}.matrix(f.dim());
    if (g.dim() == 2) {
        int n = g.resolution();
        const auto& c = f.coefficients();
        std::vector<cplx> v(n);
        for (int k = 0; k < n; ++k) {
            double t = 2.0 * M_PI * k / n;
            cplx acc(0.0);
            for (int q = 1; q < n / 2; ++q)
                acc += cplx(0.0, q) * (c[n / 2 - 1 + q] * std::polar(1.0, q * t) - c[n / 2 - 1 - q] * std::polar(1.0, -q * t));
            v[k] = acc;
        }
        return SphereField(f.grid(), std::move(v));
    }
    // t -> f(e^{tX} w) is a trigonometric polynomial of degree <= deg f.
    int D = std::max(1, f.degree());
    int K = 2 * D + 1;
    std::vector<cplx> v(g.size(), cplx(0.0));
    for (int k = 1; k < K; ++k) {
        double t = 2.0 * M_PI * k / K;
        double c = 0.0;
        for (int q = 1; q <= D; ++q) c += 2.0 * q * std::sin(q * t);
        c /= K;
        SphereField r = apply_rotation(RotationFlow{i, j, t}, f);
        for (std::size_t p = 0; p < v.size(); ++p) v[p] += c * r[p];
    }
    return SphereField(f.grid(), std::move(v));
}

std::vector<std::pair<int, int>> generators(int d) {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j) out.emplace_back(i, j);
    return out;
}

}  // namespace sconv
