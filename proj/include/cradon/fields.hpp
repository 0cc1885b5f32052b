#pragma once

// Closed-form fields: scalar radial profiles carrying two derivatives,
// functions psi(w,s) on sphere x plane with analytic s-derivatives, rapidly
// decreasing test functions on C^2 (with closed-form transforms where the
// Gaussian moment calculus gives one), and the normalized mollifier.

#include "cradon/numerics.hpp"

namespace cradon::fields {

// ---------------------------------------------------------------------------
// Scalar profile f(t) on t >= 0 with f' and f''. Fields below compose these
// with t = |s - s0|^2 or t = |z - z0|^2.

struct Deriv2 {
    double f = 0.0, ft = 0.0, ftt = 0.0;
};

namespace detail {

// B(x) = exp(-1/x) for x > 0, with derivatives. Building block of the
// smooth step used by the windowed Gaussian.
inline Deriv2 bexp(double x) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    double b = std::exp(-1.0 / x);
    double b1 = b / (x * x);
    double b2 = b / (x * x * x * x) - 2.0 * b / (x * x * x);
    return {b, b1, b2};
}

}  // namespace detail

class Profile {
  public:
    enum class Kind { gauss, bump, annular, windowed_gauss, indicator };

    // e^{-t}
    static Profile gauss() { return Profile(Kind::gauss, 0, 0, 1.0); }
    // e^{-1/(1 - t/tmax)}, support [0, tmax)
    static Profile bump(double tmax, double amp = 1.0) {
        if (!(tmax > 0.0)) throw std::invalid_argument("Profile::bump: tmax must be > 0");
        return Profile(Kind::bump, tmax, 0, amp);
    }
    // bump scaled so the peak value (at t = 0) is exactly amp
    static Profile bump_peak1(double tmax, double amp = 1.0) {
        return bump(tmax, amp * std::exp(1.0));
    }
    // exp(-1/(t-a) - 1/(b-t)) on (a, b), zero outside
    static Profile annular(double a, double b, double amp = 1.0) {
        if (!(0.0 <= a && a < b)) throw std::invalid_argument("Profile::annular: need 0 <= a < b");
        return Profile(Kind::annular, a, b, amp);
    }
    // e^{-t} times a smooth descending step: 1 on [0, t0], 0 beyond t1
    static Profile windowed_gauss(double t0, double t1) {
        if (!(0.0 <= t0 && t0 < t1))
            throw std::invalid_argument("Profile::windowed_gauss: need 0 <= t0 < t1");
        return Profile(Kind::windowed_gauss, t0, t1, 1.0);
    }
    // 1 on [0, tmax], 0 beyond; not differentiable
    static Profile indicator(double tmax) {
        if (!(tmax > 0.0)) throw std::invalid_argument("Profile::indicator: tmax must be > 0");
        return Profile(Kind::indicator, tmax, 0, 1.0);
    }

    Kind kind() const { return kind_; }
    bool differentiable() const { return kind_ != Kind::indicator; }

    // sup of the support in t (+inf for the Gaussian)
    double support_t() const {
        switch (kind_) {
            case Kind::gauss: return std::numeric_limits<double>::infinity();
            case Kind::bump: return p0_;
            case Kind::annular: return p1_;
            case Kind::windowed_gauss: return p1_;
            case Kind::indicator: return p0_;
        }
        return 0.0;
    }

    Deriv2 eval(double t) const {
        switch (kind_) {
            case Kind::gauss: {
                double e = amp_ * std::exp(-t);
                return {e, -e, e};
            }
            case Kind::bump: {
                double u = 1.0 - t / p0_;
                if (u <= 0.0) return {0, 0, 0};
                double g = amp_ * std::exp(-1.0 / u);
                double s = 1.0 / p0_;
                double g1 = -g * s / (u * u);
                double g2 = g * s * s * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
                return {g, g1, g2};
            }
            case Kind::annular: {
                if (t <= p0_ || t >= p1_) return {0, 0, 0};
                double da = t - p0_, db = p1_ - t;
                double g = amp_ * std::exp(-1.0 / da - 1.0 / db);
                double h1 = 1.0 / (da * da) - 1.0 / (db * db);
                double h2 = -2.0 / (da * da * da) - 2.0 / (db * db * db);
                return {g, g * h1, g * (h1 * h1 + h2)};
            }
            case Kind::windowed_gauss: {
                double e = std::exp(-t);
                if (t <= p0_) return {e, -e, e};
                if (t >= p1_) return {0, 0, 0};
                double inv = 1.0 / (p1_ - p0_);
                double x = (t - p0_) * inv;
                // descending step S(x) = B(1-x) / (B(x) + B(1-x))
                Deriv2 N = detail::bexp(1.0 - x);
                Deriv2 M = detail::bexp(x);
                double D = N.f + M.f;
                double N1 = -N.ft, N2 = N.ftt;           // d/dx of B(1-x)
                double D1 = N1 + M.ft;
                double D2 = N2 + M.ftt;
                double S = N.f / D;
                double S1 = (N1 * D - N.f * D1) / (D * D);
                double S2 = (N2 * D - N.f * D2) / (D * D) - 2.0 * D1 * S1 / D;
                double W = S, W1 = S1 * inv, W2 = S2 * inv * inv;
                return {e * W, e * (W1 - W), e * (W - 2.0 * W1 + W2)};
            }
            case Kind::indicator:
                return {t <= p0_ ? amp_ : 0.0, 0.0, 0.0};
        }
        return {0, 0, 0};
    }

  private:
    Profile(Kind k, double p0, double p1, double amp) : kind_(k), p0_(p0), p1_(p1), amp_(amp) {}
    Kind kind_;
    double p0_, p1_, amp_;
};

// ---------------------------------------------------------------------------
// SField: psi(w, s) = wfactor(w) * profile(|s - s0|^2), with exact Wirtinger
// s-derivatives up to total order 2.

class SField {
  public:
    enum class WKind { one, w1sq, w2sq, window };

    SField(Profile pr, cplx s_center = cplx(0, 0))
        : profile_(pr), s0_(s_center), wk_(WKind::one) {}

    static SField with_wfactor(WKind k, Profile pr, cplx s_center = cplx(0, 0)) {
        SField f(pr, s_center);
        f.wk_ = k;
        return f;
    }
    // wfactor(w) = exp((|<w,v>_H|^2 - 1)/width): a smooth window on the
    // sphere peaked along the phase orbit of v.
    static SField node_window(Point v, double width, Profile pr, cplx s_center = cplx(0, 0)) {
        if (!(width > 0.0)) throw std::invalid_argument("SField: window width must be > 0");
        SField f(pr, s_center);
        f.wk_ = WKind::window;
        f.v_ = v;
        f.width_ = width;
        return f;
    }

    double wfactor(const Point& w) const {
        switch (wk_) {
            case WKind::one: return 1.0;
            case WKind::w1sq: return std::norm(w[0]);
            case WKind::w2sq: return std::norm(w[1]);
            case WKind::window:
                return std::exp((std::norm(hdot(w, v_)) - 1.0) / width_);
        }
        return 1.0;
    }

    cplx eval(const Point& w, cplx s) const {
        return wfactor(w) * profile_.eval(std::norm(s - s0_)).f;
    }

    // d^p/ds^p d^q/dsbar^q of the s-part, scaled by the w-factor
    cplx s_deriv(const Point& w, cplx s, int p, int q) const {
        if (p < 0 || q < 0 || p + q > 2)
            throw std::invalid_argument("SField::s_deriv: order not supported");
        if (!profile_.differentiable() && p + q > 0)
            throw std::invalid_argument("SField::s_deriv: profile not differentiable");
        cplx u = s - s0_;
        Deriv2 g = profile_.eval(std::norm(u));
        cplx val;
        if (p == 0 && q == 0) val = g.f;
        else if (p == 1 && q == 0) val = g.ft * std::conj(u);
        else if (p == 0 && q == 1) val = g.ft * u;
        else if (p == 1 && q == 1) val = g.ftt * std::norm(u) + g.ft;
        else if (p == 2 && q == 0) val = g.ftt * std::conj(u) * std::conj(u);
        else val = g.ftt * u * u;
        return wfactor(w) * val;
    }

    // psi(w e^{i theta}, s e^{i theta}) = psi(w, s): every wfactor above is a
    // function of moduli only, so the property hinges on the s-center alone.
    bool phase_compatible() const { return std::abs(s0_) == 0.0; }
    cplx s_center() const { return s0_; }
    WKind wkind() const { return wk_; }
    // radius of the s-support around s_center (+inf for Gaussian profiles)
    double s_support_radius() const { return std::sqrt(profile_.support_t()); }
    const Profile& profile() const { return profile_; }

  private:
    Profile profile_;
    cplx s0_;
    WKind wk_;
    Point v_{cplx(0, 0), cplx(0, 0)};
    double width_ = 1.0;
};

// ---------------------------------------------------------------------------
// TestFunction on C^2.
//
// gaussian / gausspoly: P(u, ubar) e^{-|u|^2} with u = z - z0 and P a
// polynomial of total degree <= 2, carrying a symbolic Wirtinger term algebra
// and a closed-form transform via Gaussian t-moments.
// bump: amp * e^{-1/(1 - |u|^2/rho^2)}, exact support radius rho.

struct PolyTerm {
    cplx coef{0.0, 0.0};
    int a1 = 0, a2 = 0;  // powers of u1, u2
    int c1 = 0, c2 = 0;  // powers of conj(u1), conj(u2)
    int degree() const { return a1 + a2 + c1 + c2; }
};

class TestFunction {
  public:
    enum class Kind { gaussian, gausspoly, bump };

    static TestFunction gaussian(Point center = {cplx(0, 0), cplx(0, 0)},
                                 cplx amp = cplx(1, 0)) {
        TestFunction f(Kind::gaussian, center);
        f.terms_ = {PolyTerm{amp, 0, 0, 0, 0}};
        return f;
    }
    static TestFunction gausspoly(Point center, std::vector<PolyTerm> terms) {
        if (terms.empty()) throw std::invalid_argument("gausspoly: needs at least one term");
        for (const auto& t : terms)
            if (t.degree() > 2 || t.a1 < 0 || t.a2 < 0 || t.c1 < 0 || t.c2 < 0)
                throw std::invalid_argument("gausspoly: term degree must be within [0, 2]");
        TestFunction f(Kind::gausspoly, center);
        f.terms_ = std::move(terms);
        return f;
    }
    static TestFunction bump(Point center, double rho, cplx amp = cplx(1, 0)) {
        if (!(rho > 0.0)) throw std::invalid_argument("bump: rho must be > 0");
        TestFunction f(Kind::bump, center);
        f.rho_ = rho;
        f.amp_ = amp;
        return f;
    }

    Kind kind() const { return kind_; }
    const Point& center() const { return z0_; }
    double rho() const { return rho_; }
    bool compactly_supported() const { return kind_ == Kind::bump; }
    // radius of a ball about the ORIGIN containing the support (inf if none)
    double support_bound() const {
        return kind_ == Kind::bump ? norm(z0_) + rho_
                                   : std::numeric_limits<double>::infinity();
    }

    cplx eval(const Point& z) const {
        Point u = z - z0_;
        if (kind_ == Kind::bump) {
            double v = 1.0 - norm_sq(u) / (rho_ * rho_);
            if (v <= 0.0) return cplx(0, 0);
            return amp_ * std::exp(-1.0 / v);
        }
        return poly_eval(terms_, u) * std::exp(-norm_sq(u));
    }

    // d^p/dz^p d^q/dzbar^q with multi-indices, |p| + |q| <= 2
    cplx wirtinger(const Point& z, MultiIndex p, MultiIndex q) const {
        if (p.order() + q.order() > 2)
            throw std::invalid_argument("TestFunction::wirtinger: order above 2");
        Point u = z - z0_;
        if (kind_ == Kind::bump) return bump_wirtinger(u, p, q);
        std::vector<PolyTerm> cur = terms_;
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < p[j]; ++k) cur = d_holo(cur, j);
            for (int k = 0; k < q[j]; ++k) cur = d_anti(cur, j);
        }
        return poly_eval(cur, u) * std::exp(-norm_sq(u));
    }

    bool has_analytic_radon() const { return kind_ != Kind::bump; }

    // Closed form of the transform for unit |w|: expand the plane
    // parametrization z = s wbar + t eta into the polynomial and integrate
    // the Gaussian t-moments (int t^j tbar^k e^{-|t|^2} = pi j! delta_jk).
    cplx analytic_radon(const Point& w, cplx s) const {
        if (!has_analytic_radon())
            throw std::logic_error("analytic_radon: not available for bump kind");
        cplx sp = s - pairing(z0_, w);  // shift law
        cplx A1 = sp * std::conj(w[0]), B1 = -w[1];
        cplx A2 = sp * std::conj(w[1]), B2 = w[0];
        cplx total{0, 0};
        for (const PolyTerm& tm : terms_) {
            // polynomial in (t, tbar), powers <= 2 each
            cplx poly[3][3] = {};
            poly[0][0] = tm.coef;
            auto mul_t = [&](cplx cst, cplx lin) {  // *(cst + lin * t)
                cplx next[3][3] = {};
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k) {
                        next[j][k] += poly[j][k] * cst;
                        if (j + 1 < 3) next[j + 1][k] += poly[j][k] * lin;
                    }
                std::copy(&next[0][0], &next[0][0] + 9, &poly[0][0]);
            };
            auto mul_tb = [&](cplx cst, cplx lin) {  // *(cst + lin * tbar)
                cplx next[3][3] = {};
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k) {
                        next[j][k] += poly[j][k] * cst;
                        if (k + 1 < 3) next[j][k + 1] += poly[j][k] * lin;
                    }
                std::copy(&next[0][0], &next[0][0] + 9, &poly[0][0]);
            };
            for (int r = 0; r < tm.a1; ++r) mul_t(A1, B1);
            for (int r = 0; r < tm.a2; ++r) mul_t(A2, B2);
            for (int r = 0; r < tm.c1; ++r) mul_tb(std::conj(A1), std::conj(B1));
            for (int r = 0; r < tm.c2; ++r) mul_tb(std::conj(A2), std::conj(B2));
            total += pi * (poly[0][0] + poly[1][1] + 2.0 * poly[2][2]);
        }
        return total * std::exp(-std::norm(sp));
    }

  private:
    TestFunction(Kind k, Point z0) : kind_(k), z0_(z0) {}

    static cplx poly_eval(const std::vector<PolyTerm>& terms, const Point& u) {
        cplx acc{0, 0};
        for (const PolyTerm& t : terms) {
            cplx v = t.coef;
            for (int k = 0; k < t.a1; ++k) v *= u[0];
            for (int k = 0; k < t.a2; ++k) v *= u[1];
            for (int k = 0; k < t.c1; ++k) v *= std::conj(u[0]);
            for (int k = 0; k < t.c2; ++k) v *= std::conj(u[1]);
            acc += v;
        }
        return acc;
    }

    // d/du_j of P e^{-|u|^2}: differentiates the polynomial and pulls down
    // -conj(u_j) from the Gaussian.
    static std::vector<PolyTerm> d_holo(const std::vector<PolyTerm>& in, int j) {
        std::vector<PolyTerm> out;
        for (const PolyTerm& t : in) {
            int a = (j == 0) ? t.a1 : t.a2;
            if (a > 0) {
                PolyTerm r = t;
                r.coef *= double(a);
                (j == 0 ? r.a1 : r.a2) -= 1;
                out.push_back(r);
            }
            PolyTerm g = t;
            g.coef = -g.coef;
            (j == 0 ? g.c1 : g.c2) += 1;
            out.push_back(g);
        }
        return out;
    }
    static std::vector<PolyTerm> d_anti(const std::vector<PolyTerm>& in, int j) {
        std::vector<PolyTerm> out;
        for (const PolyTerm& t : in) {
            int c = (j == 0) ? t.c1 : t.c2;
            if (c > 0) {
                PolyTerm r = t;
                r.coef *= double(c);
                (j == 0 ? r.c1 : r.c2) -= 1;
                out.push_back(r);
            }
            PolyTerm g = t;
            g.coef = -g.coef;
            (j == 0 ? g.a1 : g.a2) += 1;
            out.push_back(g);
        }
        return out;
    }

    cplx bump_wirtinger(const Point& u, MultiIndex p, MultiIndex q) const {
        double t = norm_sq(u);
        double v = 1.0 - t / (rho_ * rho_);
        int order = p.order() + q.order();
        if (v <= 0.0) return cplx(0, 0);
        double g = std::exp(-1.0 / v);
        double s = 1.0 / (rho_ * rho_);
        double g1 = -g * s / (v * v);
        double g2 = g * s * s * (1.0 / (v * v * v * v) - 2.0 / (v * v * v));
        if (order == 0) return amp_ * g;
        cplx ub[2] = {std::conj(u[0]), std::conj(u[1])};
        if (order == 1) {
            for (int j = 0; j < 2; ++j) {
                if (p[j] == 1) return amp_ * g1 * ub[j];
                if (q[j] == 1) return amp_ * g1 * u[j];
            }
            throw std::logic_error("bump_wirtinger: malformed multi-index");
        }
        // order 2: radial chain d_j dbar_k g(|u|^2) = g'' ub_j u_k + g' delta_jk,
        // d_j d_k = g'' ub_j ub_k, dbar_j dbar_k = g'' u_j u_k
        int hp = -1, hp2 = -1, ha = -1, ha2 = -1;
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < p[j]; ++k) (hp < 0 ? hp : hp2) = j;
            for (int k = 0; k < q[j]; ++k) (ha < 0 ? ha : ha2) = j;
        }
        if (hp >= 0 && ha >= 0)
            return amp_ * (g2 * ub[hp] * u[ha] + (hp == ha ? cplx(g1, 0) : cplx(0, 0)));
        if (hp >= 0)  // two holomorphic derivatives
            return amp_ * g2 * ub[hp] * ub[hp2];
        return amp_ * g2 * u[ha] * u[ha2];
    }

    Kind kind_;
    Point z0_;
    std::vector<PolyTerm> terms_;
    double rho_ = 0.0;
    cplx amp_{1.0, 0.0};
};

// ---------------------------------------------------------------------------
// Mollifier: c exp(-1/(1 - |m z|^2)) on |z| < 1/m, normalized so the
// integral over C^2 is 1. The constant follows from the radial reduction
// int = 2 pi^2 / m^4 * int_0^1 rho^3 e^{-1/(1-rho^2)} d rho.

class Mollifier {
  public:
    explicit Mollifier(int m) : m_(m) {
        if (m < 1) throw std::invalid_argument("Mollifier: m must be >= 1");
        c_ = std::pow(double(m), 4) / (sphere3_area * radial_mass());
    }

    int m() const { return m_; }
    double radius() const { return 1.0 / m_; }
    double normalization() const { return c_; }

    double operator()(const Point& z) const {
        double t = double(m_) * double(m_) * norm_sq(z);
        if (t >= 1.0) return 0.0;
        return c_ * std::exp(-1.0 / (1.0 - t));
    }

    // Wirtinger derivatives via the radial chain, |p| + |q| <= 2.
    cplx wirtinger(const Point& z, MultiIndex p, MultiIndex q) const {
        if (p.order() + q.order() > 2)
            throw std::invalid_argument("Mollifier::wirtinger: order above 2");
        double mm = double(m_) * double(m_);
        double u = 1.0 - mm * norm_sq(z);
        if (u <= 0.0) return cplx(0, 0);
        double g = c_ * std::exp(-1.0 / u);
        double g1 = -mm * g / (u * u);
        double g2 = mm * mm * g * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
        int order = p.order() + q.order();
        if (order == 0) return g;
        cplx zb[2] = {std::conj(z[0]), std::conj(z[1])};
        if (order == 1) {
            for (int j = 0; j < 2; ++j) {
                if (p[j] == 1) return g1 * zb[j];
                if (q[j] == 1) return g1 * z[j];
            }
            throw std::logic_error("Mollifier::wirtinger: malformed multi-index");
        }
        int hp = -1, hp2 = -1, ha = -1, ha2 = -1;
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < p[j]; ++k) (hp < 0 ? hp : hp2) = j;
            for (int k = 0; k < q[j]; ++k) (ha < 0 ? ha : ha2) = j;
        }
        if (hp >= 0 && ha >= 0)
            return g2 * zb[hp] * z[ha] + (hp == ha ? cplx(g1, 0) : cplx(0, 0));
        if (hp >= 0) return g2 * zb[hp] * zb[hp2];
        return g2 * z[ha] * z[ha2];
    }

    // int_0^1 rho^3 e^{-1/(1-rho^2)} d rho, computed once to machine accuracy
    static double radial_mass() {
        static const double value = [] {
            numerics::Rule1D g = numerics::gauss_legendre_ab(128, 0.0, 1.0);
            double acc = 0.0;
            for (int i = 0; i < 128; ++i) {
                double r = g.x[i];
                acc += g.w[i] * r * r * r * std::exp(-1.0 / (1.0 - r * r));
            }
            return acc;
        }();
        return value;
    }

  private:
    int m_;
    double c_;
};

}  // namespace cradon::fields
