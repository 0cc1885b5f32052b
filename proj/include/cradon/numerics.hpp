#pragma once

// Quadrature rules (S^3 product grid, polar disk rules), the sinogram grid in
// the offset variable s, Wirtinger finite differences, and the two
// convolutions (in s and over C^2).

#include <cstdint>
#include <memory>
#include <optional>

#include "cradon/core.hpp"
#include "cradon/geometry.hpp"

namespace cradon::numerics {

// ---------------------------------------------------------------------------
// Gauss-Legendre

struct Rule1D {
    std::vector<double> x;  // nodes
    std::vector<double> w;  // weights
};

// Nodes/weights on [-1,1] by Newton iteration on the Legendre recurrence.
inline Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

inline Rule1D gauss_legendre_ab(int n, double a, double b) {
    Rule1D base = gauss_legendre(n);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        r.x[i] = mid + half * base.x[i];
        r.w[i] = half * base.w[i];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Sphere grid on S^3 in Hopf coordinates w = (e^{i t1} cos eta, e^{i t2} sin eta)

struct SphereGrid {
    std::vector<Point> nodes;
    std::vector<double> weights;
    int n_eta = 0;
    int n_theta = 0;

    std::size_t size() const { return nodes.size(); }
    double weight_sum() const { return pairwise_sum(weights); }
};

// Product rule: the Gauss rule for the density cos(eta)sin(eta) d(eta) on
// [0,pi/2] (realized through u = cos^2(eta), which maps the density to du/2),
// times the uniform trapezoid in each phase angle. Weights sum to 2*pi^2
// exactly up to rounding.
inline SphereGrid sphere_grid(int n_eta, int n_theta) {
    if (n_eta < 4 || n_theta < 4)
        throw std::invalid_argument("sphere_grid: need n_eta >= 4 and n_theta >= 4");
    SphereGrid g;
    g.n_eta = n_eta;
    g.n_theta = n_theta;
    Rule1D u = gauss_legendre_ab(n_eta, 0.0, 1.0);
    double dtheta = two_pi / n_theta;
    g.nodes.reserve(std::size_t(n_eta) * n_theta * n_theta);
    g.weights.reserve(g.nodes.capacity());
    for (int k = 0; k < n_eta; ++k) {
        double ce = std::sqrt(u.x[k]);        // cos(eta)
        double se = std::sqrt(1.0 - u.x[k]);  // sin(eta)
        double wk = 0.5 * u.w[k] * dtheta * dtheta;
        for (int j1 = 0; j1 < n_theta; ++j1) {
            cplx e1 = std::polar(1.0, dtheta * j1);
            for (int j2 = 0; j2 < n_theta; ++j2) {
                cplx e2 = std::polar(1.0, dtheta * j2);
                g.nodes.push_back(Point{ce * e1, se * e2});
                g.weights.push_back(wk);
            }
        }
    }
    return g;
}

// Composite variant whose eta rule is split at a prescribed value of
// cos^2(eta). Used when the integrand has a circular jump there.
inline SphereGrid sphere_grid_split(int n_eta_half, int n_theta, double u_split) {
    if (n_eta_half < 4 || n_theta < 4)
        throw std::invalid_argument("sphere_grid_split: sizes below minimum");
    if (!(u_split > 0.0 && u_split < 1.0))
        throw std::invalid_argument("sphere_grid_split: split must lie in (0,1)");
    SphereGrid g;
    g.n_eta = 2 * n_eta_half;
    g.n_theta = n_theta;
    Rule1D lo = gauss_legendre_ab(n_eta_half, 0.0, u_split);
    Rule1D hi = gauss_legendre_ab(n_eta_half, u_split, 1.0);
    std::vector<double> ux(lo.x), uw(lo.w);
    ux.insert(ux.end(), hi.x.begin(), hi.x.end());
    uw.insert(uw.end(), hi.w.begin(), hi.w.end());
    double dtheta = two_pi / n_theta;
    for (std::size_t k = 0; k < ux.size(); ++k) {
        double ce = std::sqrt(ux[k]);
        double se = std::sqrt(1.0 - ux[k]);
        double wk = 0.5 * uw[k] * dtheta * dtheta;
        for (int j1 = 0; j1 < n_theta; ++j1) {
            cplx e1 = std::polar(1.0, dtheta * j1);
            for (int j2 = 0; j2 < n_theta; ++j2) {
                cplx e2 = std::polar(1.0, dtheta * j2);
                g.nodes.push_back(Point{ce * e1, se * e2});
                g.weights.push_back(wk);
            }
        }
    }
    return g;
}

// Sum of weight * f(node) in fixed tree order.
template <typename F>
cplx integrate_sphere(const SphereGrid& g, F&& f) {
    std::vector<cplx> terms(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx v = f(g.nodes[i]);
        if (!is_finite(v))
            throw std::runtime_error("integrate_sphere: non-finite integrand at node " +
                                     std::to_string(i));
        terms[i] = g.weights[i] * v;
    }
    return pairwise_sum(terms);
}

// ---------------------------------------------------------------------------
// Polar rule on a disk |t| <= radius in C

struct DiskRule {
    std::vector<cplx> points;
    std::vector<double> weights;  // Lebesgue d(omega_2)

    std::size_t size() const { return points.size(); }
};

inline DiskRule disk_rule(double radius, int n_r, int n_phi) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk_rule: radius must be > 0");
    if (n_r < 1 || n_phi < 1) throw std::invalid_argument("disk_rule: sizes must be >= 1");
    DiskRule d;
    Rule1D rr = gauss_legendre_ab(n_r, 0.0, radius);
    double dphi = two_pi / n_phi;
    d.points.reserve(std::size_t(n_r) * n_phi);
    d.weights.reserve(d.points.capacity());
    for (int i = 0; i < n_r; ++i) {
        for (int j = 0; j < n_phi; ++j) {
            d.points.push_back(std::polar(rr.x[i], dphi * j));
            d.weights.push_back(rr.w[i] * rr.x[i] * dphi);
        }
    }
    return d;
}

// Annular variant for integrands supported on r_in <= |t| <= r_out.
inline DiskRule annulus_rule(double r_in, double r_out, int n_r, int n_phi) {
    if (!(0.0 <= r_in && r_in < r_out))
        throw std::invalid_argument("annulus_rule: need 0 <= r_in < r_out");
    DiskRule d;
    Rule1D rr = gauss_legendre_ab(n_r, r_in, r_out);
    double dphi = two_pi / n_phi;
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_phi; ++j) {
            d.points.push_back(std::polar(rr.x[i], dphi * j));
            d.weights.push_back(rr.w[i] * rr.x[i] * dphi);
        }
    return d;
}

// Product of two polar rules: quadrature over a polydisc in C^2.
struct BidiskRule {
    std::vector<Point> points;
    std::vector<double> weights;
    std::size_t size() const { return points.size(); }
};

inline BidiskRule bidisk_rule(double radius, int n_r, int n_phi) {
    DiskRule d = disk_rule(radius, n_r, n_phi);
    BidiskRule b;
    b.points.reserve(d.size() * d.size());
    b.weights.reserve(d.size() * d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) {
            b.points.push_back(Point{d.points[i], d.points[j]});
            b.weights.push_back(d.weights[i] * d.weights[j]);
        }
    return b;
}

// ---------------------------------------------------------------------------
// Hyperplane quadrature

struct PlaneRule {
    std::vector<Point> points;
    std::vector<double> weights;
    std::size_t size() const { return points.size(); }
};

// Points z(t) = s*conj(xi) + t*eta with eta = (-xi_2, xi_1): <eta,xi> = 0 and
// |eta| = 1, so the map t -> z(t) is an isometry of C onto the hyperplane
// {<z,xi> = s} and the weights are plain Lebesgue weights in t.
inline PlaneRule hyperplane_quadrature(const geometry::Hyperplane& h, double cutoff,
                                       int n_r, int n_phi) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("hyperplane_quadrature: cutoff must be > 0");
    const Point& xi = h.normal();
    cplx s = h.offset();
    Point base{s * std::conj(xi[0]), s * std::conj(xi[1])};
    Point eta{-xi[1], xi[0]};
    DiskRule d = disk_rule(cutoff, n_r, n_phi);
    PlaneRule p;
    p.points.resize(d.size());
    p.weights = std::move(d.weights);
    for (std::size_t i = 0; i < d.size(); ++i) p.points[i] = base + d.points[i] * eta;
    return p;
}

// ---------------------------------------------------------------------------
// SGrid: square uniform grid in the offset variable s

struct SGrid {
    cplx center{0.0, 0.0};
    double extent = 0.0;  // half-width
    int count = 0;        // odd, nodes per axis

    SGrid() = default;
    SGrid(cplx c, double ext, int n) : center(c), extent(ext), count(n) {
        if (!(ext > 0.0)) throw std::invalid_argument("SGrid: extent must be > 0");
        if (n < 9) throw std::invalid_argument("SGrid: count must be >= 9");
        if (n % 2 == 0) throw std::invalid_argument("SGrid: count must be odd");
    }

    double spacing() const { return 2.0 * extent / (count - 1); }
    // rows index Im(s), cols index Re(s)
    cplx at(int row, int col) const {
        return center + cplx(-extent + spacing() * col, -extent + spacing() * row);
    }
};

// ---------------------------------------------------------------------------
// Sinogram: samples over sphere nodes x s-grid

struct Sinogram {
    SphereGrid sphere;
    SGrid grid;
    std::vector<cplx> values;  // [node][row][col], row-major
    int valid_margin = 0;      // boundary ring (cells) excluded from use
    std::string provenance;

    Sinogram() = default;
    Sinogram(SphereGrid sp, SGrid g)
        : sphere(std::move(sp)), grid(g),
          values(sphere.size() * std::size_t(g.count) * g.count, cplx{0.0, 0.0}) {}

    std::size_t index(std::size_t node, int row, int col) const {
        return (node * grid.count + row) * grid.count + col;
    }
    cplx& at(std::size_t node, int row, int col) { return values[index(node, row, col)]; }
    const cplx& at(std::size_t node, int row, int col) const {
        return values[index(node, row, col)];
    }

    void check_finite() const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!is_finite(values[i]))
                throw std::runtime_error("sinogram holds a non-finite value at flat index " +
                                         std::to_string(i));
    }

    bool in_valid_region(const cplx& s, int extra_margin = 0) const {
        double h = grid.spacing();
        int m = valid_margin + extra_margin;
        double lo = -grid.extent + m * h;
        double hi = grid.extent - m * h;
        cplx rel = s - grid.center;
        return rel.real() >= lo && rel.real() <= hi && rel.imag() >= lo && rel.imag() <= hi;
    }

    // Bilinear interpolation in s for one node.
    cplx sample(std::size_t node, const cplx& s) const {
        if (!in_valid_region(s))
            throw std::runtime_error("sinogram sample outside the valid s-region");
        double h = grid.spacing();
        double fx = (s.real() - grid.center.real() + grid.extent) / h;
        double fy = (s.imag() - grid.center.imag() + grid.extent) / h;
        int c0 = std::min(int(fx), grid.count - 2);
        int r0 = std::min(int(fy), grid.count - 2);
        double ax = fx - c0, ay = fy - r0;
        const cplx v00 = at(node, r0, c0), v01 = at(node, r0, c0 + 1);
        const cplx v10 = at(node, r0 + 1, c0), v11 = at(node, r0 + 1, c0 + 1);
        return (1 - ay) * ((1 - ax) * v00 + ax * v01) + ay * ((1 - ax) * v10 + ax * v11);
    }

    // Catmull-Rom bicubic interpolation: third-order accurate, needs one
    // extra cell of valid data around s compared to the bilinear sampler.
    cplx sample_cubic(std::size_t node, const cplx& s) const {
        if (!in_valid_region(s, 1))
            throw std::runtime_error("sinogram cubic sample outside the valid s-region");
        double h = grid.spacing();
        double fx = (s.real() - grid.center.real() + grid.extent) / h;
        double fy = (s.imag() - grid.center.imag() + grid.extent) / h;
        int c1 = std::clamp(int(fx), 1, grid.count - 3);
        int r1 = std::clamp(int(fy), 1, grid.count - 3);
        double ax = fx - c1, ay = fy - r1;
        auto keys = [](double a, double w[4]) {
            w[0] = 0.5 * (-a + 2.0 * a * a - a * a * a);
            w[1] = 0.5 * (2.0 - 5.0 * a * a + 3.0 * a * a * a);
            w[2] = 0.5 * (a + 4.0 * a * a - 3.0 * a * a * a);
            w[3] = 0.5 * (-a * a + a * a * a);
        };
        double wx[4], wy[4];
        keys(ax, wx);
        keys(ay, wy);
        cplx acc{0.0, 0.0};
        for (int m = 0; m < 4; ++m) {
            cplx row{0.0, 0.0};
            for (int n = 0; n < 4; ++n) row += wx[n] * at(node, r1 - 1 + m, c1 - 1 + n);
            acc += wy[m] * row;
        }
        return acc;
    }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

// ---------------------------------------------------------------------------
// Wirtinger finite differences on a sinogram.
//
// Convention: d/ds = (d/da - i d/db)/2, d/dsbar = (d/da + i d/db)/2 for
// s = a + ib. Mixed second order reduces to (d2/da2 + d2/db2)/4. Fourth-order
// central stencils; the boundary ring of 2 cells becomes invalid.

namespace detail {

// 4th-order central first and second derivative stencils, spacing h.
inline cplx stencil_d1(const cplx* f, std::ptrdiff_t stride, double h) {
    return (f[-2 * stride] - 8.0 * f[-stride] + 8.0 * f[stride] - f[2 * stride]) / (12.0 * h);
}
inline cplx stencil_d2(const cplx* f, std::ptrdiff_t stride, double h) {
    return (-f[-2 * stride] + 16.0 * f[-stride] - 30.0 * f[0] + 16.0 * f[stride] -
            f[2 * stride]) /
           (12.0 * h * h);
}

}  // namespace detail

inline Sinogram s_derivative(const Sinogram& in, int p, int q) {
    if (p < 0 || q < 0) throw std::invalid_argument("s_derivative: orders must be >= 0");
    if (p + q > 2) throw std::invalid_argument("s_derivative: only orders p+q <= 2 supported");
    if (in.grid.count < 9) throw std::invalid_argument("s_derivative: grid too small");
    Sinogram out(in.sphere, in.grid);
    out.valid_margin = in.valid_margin + 2;
    out.provenance = in.provenance + "|d_s^" + std::to_string(p) + " d_sbar^" + std::to_string(q);
    if (p == 0 && q == 0) {
        out.values = in.values;
        out.valid_margin = in.valid_margin;
        return out;
    }
    const int n = in.grid.count;
    const double h = in.grid.spacing();
    const std::ptrdiff_t col_stride = 1;
    const std::ptrdiff_t row_stride = n;
    const int lo = out.valid_margin, hi = n - out.valid_margin;

    parallel_for(in.sphere.size(), [&](std::size_t node) {
        const cplx* base = in.values.data() + node * std::size_t(n) * n;
        for (int r = lo; r < hi; ++r) {
            for (int c = lo; c < hi; ++c) {
                const cplx* f = base + std::size_t(r) * n + c;
                cplx val;
                if (p == 1 && q == 0) {
                    val = 0.5 * (detail::stencil_d1(f, col_stride, h) -
                                 cplx(0, 1) * detail::stencil_d1(f, row_stride, h));
                } else if (p == 0 && q == 1) {
                    val = 0.5 * (detail::stencil_d1(f, col_stride, h) +
                                 cplx(0, 1) * detail::stencil_d1(f, row_stride, h));
                } else if (p == 1 && q == 1) {
                    val = 0.25 * (detail::stencil_d2(f, col_stride, h) +
                                  detail::stencil_d2(f, row_stride, h));
                } else {
                    // p+q == 2, pure: (d/da -+ i d/db)^2 / 4
                    // cross term via composed first-derivative stencils
                    cplx daa = detail::stencil_d2(f, col_stride, h);
                    cplx dbb = detail::stencil_d2(f, row_stride, h);
                    cplx dab{0.0, 0.0};
                    {
                        // d/da then d/db, both 4th order
                        const double c12 = 12.0 * h;
                        cplx rowvals[5];
                        for (int k = -2; k <= 2; ++k) {
                            const cplx* g = f + k * row_stride;
                            rowvals[k + 2] =
                                (g[-2] - 8.0 * g[-1] + 8.0 * g[1] - g[2]) / c12;
                        }
                        dab = (rowvals[0] - 8.0 * rowvals[1] + 8.0 * rowvals[3] - rowvals[4]) /
                              c12;
                    }
                    if (p == 2)
                        val = 0.25 * (daa - dbb) - cplx(0, 0.5) * dab;
                    else
                        val = 0.25 * (daa - dbb) + cplx(0, 0.5) * dab;
                }
                out.at(node, r, c) = val;
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Convolution in s against a compactly supported kernel on C.
//
// Direct summation with spacing^2 weights; the kernel is tabulated once on
// the offset lattice. The valid region shrinks by ceil(r0/h) cells.

template <typename Kernel>
Sinogram convolve_s(const Sinogram& in, Kernel&& kernel, double support_radius) {
    const double h = in.grid.spacing();
    if (!(support_radius > 0.0))
        throw std::invalid_argument("convolve_s: kernel support radius must be > 0");
    if (support_radius >= in.grid.extent / 2.0)
        throw std::invalid_argument("convolve_s: kernel support too large for grid");
    const int k = int(std::ceil(support_radius / h));
    const int n = in.grid.count;

    // kernel table on the offset lattice
    std::vector<cplx> table((2 * k + 1) * (2 * k + 1));
    for (int dr = -k; dr <= k; ++dr)
        for (int dc = -k; dc <= k; ++dc)
            table[(dr + k) * (2 * k + 1) + (dc + k)] = kernel(cplx(dc * h, dr * h));

    Sinogram out(in.sphere, in.grid);
    out.valid_margin = in.valid_margin + k;
    out.provenance = in.provenance + "|conv_s";
    const double cell = h * h;
    const int lo = out.valid_margin, hi = n - out.valid_margin;
    parallel_for(in.sphere.size(), [&](std::size_t node) {
        for (int r = lo; r < hi; ++r)
            for (int c = lo; c < hi; ++c) {
                cplx acc{0.0, 0.0};
                for (int dr = -k; dr <= k; ++dr)
                    for (int dc = -k; dc <= k; ++dc)
                        acc += in.at(node, r - dr, c - dc) *
                               table[(dr + k) * (2 * k + 1) + (dc + k)];
                out.at(node, r, c) = acc * cell;
            }
    });
    out.check_finite();
    return out;
}

// ---------------------------------------------------------------------------
// Convolution over C^2 against a normalized mollifier.
//
// alpha must expose radius() and a real-valued call operator on Point. The
// product polar rule covers the polydisc of that radius (the mollifier
// vanishes outside the inscribed ball, so nothing leaks). n_phi must be even
// so the rule is symmetric under u -> -u and odd moments cancel exactly.

template <typename Alpha>
BidiskRule mollifier_rule(const Alpha& alpha, int n_r, int n_phi) {
    if (n_phi % 2 != 0) throw std::invalid_argument("mollifier_rule: n_phi must be even");
    BidiskRule rule = bidisk_rule(alpha.radius(), n_r, n_phi);
    std::vector<double> terms(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i)
        terms[i] = rule.weights[i] * alpha(rule.points[i]);
    double total = pairwise_sum(terms);
    if (std::abs(total - 1.0) > 1e-6)
        throw std::runtime_error(
            "convolve_cn: mollifier mass under the rule is " + std::to_string(total) +
            ", expected 1 within 1e-6 (raise the rule size or fix the normalization)");
    return rule;
}

// Returns a callable z -> (f * alpha)(z).
template <typename F, typename Alpha>
auto convolve_cn(F f, const Alpha& alpha, int n_r = 40, int n_phi = 12) {
    auto rule = std::make_shared<BidiskRule>(mollifier_rule(alpha, n_r, n_phi));
    std::vector<double> avals(rule->size());
    for (std::size_t i = 0; i < rule->size(); ++i)
        avals[i] = rule->weights[i] * alpha(rule->points[i]);
    return [f = std::move(f), rule, avals = std::move(avals)](const Point& z) {
        std::vector<cplx> terms(rule->size());
        for (std::size_t i = 0; i < rule->size(); ++i)
            terms[i] = avals[i] * f(z - rule->points[i]);
        return pairwise_sum(terms);
    };
}

}  // namespace cradon::numerics
