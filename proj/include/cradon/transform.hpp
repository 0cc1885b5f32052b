#pragma once

// The transform pipeline: forward integrals over complex hyperplanes, the
// dual (backprojection) integral over S^3, constant calibration, inversion
// through the mixed second s-derivative, and the reduction to the real Radon
// transform by integrating along vertical lines in the offset plane.

#include <concepts>

#include "cradon/fields.hpp"

namespace cradon::transform {

struct QuadParams {
    double cutoff = 6.0;  // radius of the disk in the plane parameter t
    int n_r = 64;
    int n_phi = 64;
};

// Integral of phi over the hyperplane of H (unit normal, so the prefactor
// of the transform is 1).
template <typename F>
    requires std::invocable<F&, const Point&>
cplx forward_field(F&& phi, const geometry::Hyperplane& H, const QuadParams& qp = {}) {
    numerics::PlaneRule rule = numerics::hyperplane_quadrature(H, qp.cutoff, qp.n_r, qp.n_phi);
    std::vector<cplx> terms(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i)
        terms[i] = rule.weights[i] * phi(rule.points[i]);
    cplx v = pairwise_sum(terms);
    if (!is_finite(v)) throw std::runtime_error("forward: non-finite plane integral");
    return v;
}

inline cplx forward(const fields::TestFunction& phi, const geometry::Hyperplane& H,
                    const QuadParams& qp = {}) {
    return forward_field([&](const Point& z) { return phi.eval(z); }, H, qp);
}

// Literal form with an arbitrary nonzero normal: (1/|xi|^2) times the plane
// integral, parametrized without canonicalizing, so the quadrature nodes
// follow the phase of xi. Homogeneous of degree -2 in the scale of (xi, s)
// and invariant under pure phases.
template <typename F>
    requires std::invocable<F&, const Point&>
cplx forward_raw(F&& phi, const Point& xi, cplx s, const QuadParams& qp = {}) {
    double n2 = norm_sq(xi);
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw std::invalid_argument("forward_raw: normal must be nonzero and finite");
    double n = std::sqrt(n2);
    Point base{s * std::conj(xi[0]) / n2, s * std::conj(xi[1]) / n2};
    Point eta{-xi[1] / n, xi[0] / n};
    numerics::DiskRule disk = numerics::disk_rule(qp.cutoff, qp.n_r, qp.n_phi);
    std::vector<cplx> terms(disk.size());
    for (std::size_t i = 0; i < disk.size(); ++i)
        terms[i] = disk.weights[i] * phi(base + disk.points[i] * eta);
    cplx v = pairwise_sum(terms);
    if (!is_finite(v)) throw std::runtime_error("forward_raw: non-finite plane integral");
    return v / n2;
}

inline cplx forward_raw(const fields::TestFunction& phi, const Point& xi, cplx s,
                        const QuadParams& qp = {}) {
    return forward_raw([&](const Point& z) { return phi.eval(z); }, xi, s, qp);
}

// ---------------------------------------------------------------------------
// Sinogram assembly

enum class SinogramMode { automatic, numeric, analytic };

inline numerics::Sinogram forward_sinogram(const fields::TestFunction& phi,
                                           const numerics::SphereGrid& sphere,
                                           const numerics::SGrid& grid,
                                           const QuadParams& qp = {},
                                           SinogramMode mode = SinogramMode::automatic) {
    bool analytic;
    switch (mode) {
        case SinogramMode::automatic: analytic = phi.has_analytic_radon(); break;
        case SinogramMode::analytic:
            if (!phi.has_analytic_radon())
                throw std::invalid_argument(
                    "forward_sinogram: no closed form for this test function");
            analytic = true;
            break;
        default: analytic = false;
    }
    numerics::Sinogram S(sphere, grid);
    if (analytic) {
        S.provenance = "forward:analytic";
        parallel_for(sphere.size(), [&](std::size_t node) {
            const Point& w = sphere.nodes[node];
            for (int r = 0; r < grid.count; ++r)
                for (int c = 0; c < grid.count; ++c)
                    S.at(node, r, c) = phi.analytic_radon(w, grid.at(r, c));
        });
    } else {
        S.provenance = "forward:numeric(cutoff=" + std::to_string(qp.cutoff) +
                       ",r=" + std::to_string(qp.n_r) + ",phi=" + std::to_string(qp.n_phi) +
                       ")";
        numerics::DiskRule disk = numerics::disk_rule(qp.cutoff, qp.n_r, qp.n_phi);
        // A plane {<z,w> = s} with unit w sits at distance |s - <z0,w>| from
        // z0, so planes missing a compact support integrate to exactly zero.
        const bool compact = phi.compactly_supported();
        parallel_for(sphere.size(), [&](std::size_t node) {
            const Point& w = sphere.nodes[node];
            Point eta{-w[1], w[0]};
            cplx s_center = compact ? pairing(phi.center(), w) : cplx(0, 0);
            std::vector<cplx> terms(disk.size());
            for (int r = 0; r < grid.count; ++r)
                for (int c = 0; c < grid.count; ++c) {
                    cplx s = grid.at(r, c);
                    if (compact && std::abs(s - s_center) > phi.rho()) {
                        S.at(node, r, c) = cplx(0, 0);
                        continue;
                    }
                    Point base{s * std::conj(w[0]), s * std::conj(w[1])};
                    for (std::size_t i = 0; i < disk.size(); ++i)
                        terms[i] = disk.weights[i] * phi.eval(base + disk.points[i] * eta);
                    S.at(node, r, c) = pairwise_sum(terms);
                }
        });
    }
    S.check_finite();
    return S;
}

// ---------------------------------------------------------------------------
// Dual transform R* f(z) = int_{S^3} f(w, <z,w>) d sigma(w)

template <typename F>
    requires std::invocable<F&, const Point&, cplx>
cplx dual(F&& f, const Point& z, const numerics::SphereGrid& sphere) {
    return numerics::integrate_sphere(
        sphere, [&](const Point& w) { return f(w, pairing(z, w)); });
}

inline cplx dual(const numerics::Sinogram& S, const Point& z) {
    std::vector<cplx> terms(S.sphere.size());
    for (std::size_t i = 0; i < S.sphere.size(); ++i) {
        cplx s = pairing(z, S.sphere.nodes[i]);
        if (!S.in_valid_region(s, 1))
            throw std::runtime_error(
                "dual: <z,w> leaves the sinogram's valid s-region; enlarge the grid");
        terms[i] = S.sphere.weights[i] * S.sample_cubic(i, s);
    }
    cplx v = pairwise_sum(terms);
    if (!is_finite(v)) throw std::runtime_error("dual: non-finite value");
    return v;
}

// ---------------------------------------------------------------------------
// Calibration of the inversion constant. For the unit Gaussian the whole
// pipeline collapses to a closed form, so
//     c_hat = phi(z) / [ (-1) * R*(d^2 phi-hat / ds dsbar)(z) ]
// must coincide with 1/(2 pi^3) at every z. The mixed derivative is taken
// with fourth-order stencils on numerically computed plane integrals, so a
// passing calibration certifies forward quadrature, stencils, and the sphere
// rule at once.

inline constexpr double cn_analytic = 1.0 / (2.0 * pi * pi * pi);

struct CalibParams {
    int n_eta = 12;
    int n_theta = 8;
    QuadParams quad{6.0, 40, 8};
    double fd_h = 0.06;
    std::vector<double> radii{0.0, 0.5, 1.0};
};

struct Calibration {
    double c_hat = 0.0;    // measured at the first radius
    double analytic = cn_analytic;
    double rel_dev = 0.0;  // |c_hat - analytic| / analytic
    std::vector<std::pair<double, double>> per_radius;
};

inline Calibration calibrate_cn(const CalibParams& P = {}) {
    if (P.radii.empty()) throw std::invalid_argument("calibrate_cn: need at least one radius");
    const fields::TestFunction phi = fields::TestFunction::gaussian();
    numerics::SphereGrid sp = numerics::sphere_grid(P.n_eta, P.n_theta);
    numerics::DiskRule disk = numerics::disk_rule(P.quad.cutoff, P.quad.n_r, P.quad.n_phi);
    Calibration out;
    const double h = P.fd_h;
    for (double r : P.radii) {
        Point zr{cplx(r, 0.0), cplx(0.0, 0.0)};
        std::vector<cplx> terms(sp.size());
        parallel_for(sp.size(), [&](std::size_t i) {
            const Point& w = sp.nodes[i];
            Point eta{-w[1], w[0]};
            auto fhat = [&](cplx s) {
                Point base{s * std::conj(w[0]), s * std::conj(w[1])};
                std::vector<cplx> vals(disk.size());
                for (std::size_t j = 0; j < disk.size(); ++j)
                    vals[j] = disk.weights[j] * phi.eval(base + disk.points[j] * eta);
                return pairwise_sum(vals);
            };
            cplx s0 = pairing(zr, w);
            cplx c0 = fhat(s0);
            auto d2 = [&](cplx step) {
                return (-fhat(s0 - 2.0 * step) + 16.0 * fhat(s0 - step) - 30.0 * c0 +
                        16.0 * fhat(s0 + step) - fhat(s0 + 2.0 * step)) /
                       (12.0 * h * h);
            };
            // d^2/ds dsbar = (d^2/da^2 + d^2/db^2) / 4
            terms[i] = sp.weights[i] * 0.25 * (d2(cplx(h, 0)) + d2(cplx(0, h)));
        });
        cplx backprojected = pairwise_sum(terms);
        if (std::abs(backprojected) < 1e-6)
            throw std::runtime_error("calibrate_cn: backprojection vanished, pipeline broken");
        double c_hat = std::exp(-r * r) / (-backprojected.real());
        out.per_radius.push_back({r, c_hat});
    }
    out.c_hat = out.per_radius.front().second;
    out.rel_dev = std::abs(out.c_hat - out.analytic) / out.analytic;
    return out;
}

// ---------------------------------------------------------------------------
// Inversion: phi(z) = (-1)^{n-1} c_n R*(d^2 phi-hat / ds dsbar)(z), n = 2.

// Pointwise, from the already-differentiated sinogram.
inline cplx invert_point(const numerics::Sinogram& dss, const Point& z, double cn) {
    return -cn * dual(dss, z);
}

struct VolumeGrid {
    double extent = 2.0;  // half-width per real axis
    int count = 9;        // nodes per axis, odd
    std::vector<cplx> values;

    double spacing() const { return 2.0 * extent / (count - 1); }
    std::size_t index(int i, int j, int k, int l) const {
        return ((std::size_t(i) * count + j) * count + k) * count + l;
    }
    // axes: (Re z1, Im z1, Re z2, Im z2)
    Point point_at(int i, int j, int k, int l) const {
        double h = spacing();
        return Point{cplx(-extent + i * h, -extent + j * h),
                     cplx(-extent + k * h, -extent + l * h)};
    }
    const cplx& at(int i, int j, int k, int l) const { return values[index(i, j, k, l)]; }
    std::size_t size() const { return values.size(); }
};

inline VolumeGrid invert(const numerics::Sinogram& S, double extent, int count, double cn) {
    if (!(extent > 0.0)) throw std::invalid_argument("invert: extent must be > 0");
    if (count < 3 || count % 2 == 0)
        throw std::invalid_argument("invert: count must be odd and >= 3");
    numerics::Sinogram dss = numerics::s_derivative(S, 1, 1);
    VolumeGrid V;
    V.extent = extent;
    V.count = count;
    V.values.resize(std::size_t(count) * count * count * count);
    const std::size_t n3 = std::size_t(count) * count * count;
    parallel_for(V.values.size(), [&](std::size_t flat) {
        int i = int(flat / n3);
        int j = int((flat / (count * count)) % count);
        int k = int((flat / count) % count);
        int l = int(flat % count);
        V.values[flat] = invert_point(dss, V.point_at(i, j, k, l), cn);
    });
    for (const cplx& v : V.values)
        if (!is_finite(v)) throw std::runtime_error("invert: non-finite reconstruction");
    return V;
}

// ---------------------------------------------------------------------------
// Real Radon transform from the complex one: integrate the sinogram at the
// conjugated direction along the vertical line Re s = t,
//     (R_R phi)(w, t) = int phi-hat(wbar, t + ix) dx,
// truncated to |x| <= truncation. The direction and t must land on the grid
// (conjugate node and column within 1e-9); composite Simpson along the rows.

inline cplx real_radon_from_complex(const numerics::Sinogram& S, const Point& w, double t,
                                    double truncation) {
    if (!(truncation > 0.0))
        throw std::invalid_argument("real_radon_from_complex: truncation must be > 0");
    Point target{std::conj(w[0]), std::conj(w[1])};
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < S.sphere.size(); ++i) {
        double d = norm(S.sphere.nodes[i] - target);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    if (bd > 1e-9)
        throw std::invalid_argument(
            "real_radon_from_complex: conj(w) is not a node of the sphere grid");
    const numerics::SGrid& g = S.grid;
    const double h = g.spacing();
    int col = int(std::lround((t - g.center.real() + g.extent) / h));
    if (col < 0 || col >= g.count || std::abs(g.at(0, col).real() - t) > 1e-9)
        throw std::invalid_argument("real_radon_from_complex: t must lie on a grid column");
    int rc = int(std::lround((0.0 - g.center.imag() + g.extent) / h));
    if (rc < 0 || rc >= g.count || std::abs(g.at(rc, col).imag()) > 1e-9)
        throw std::invalid_argument(
            "real_radon_from_complex: grid must contain the real axis Im s = 0");
    int K = int(std::floor(truncation / h + 1e-12));
    if (K < 1)
        throw std::invalid_argument("real_radon_from_complex: truncation below grid spacing");
    if (!S.in_valid_region(g.at(rc - K, col)) || !S.in_valid_region(g.at(rc + K, col)))
        throw std::runtime_error(
            "real_radon_from_complex: truncation window leaves the valid s-region");
    // composite Simpson over 2K intervals
    cplx acc = S.at(best, rc - K, col) + S.at(best, rc + K, col);
    for (int k = 1; k < 2 * K; ++k) {
        double coeff = (k % 2 == 1) ? 4.0 : 2.0;
        acc += coeff * S.at(best, rc - K + k, col);
    }
    return acc * (h / 3.0);
}

}  // namespace cradon::transform
