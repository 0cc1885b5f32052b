#pragma once

// Distributions of order <= 2 built from point masses and rapidly decreasing
// densities, their mollification, and the Radon transform defined through the
// duality <RT, psi> = <T, R* psi>.

#include "cradon/transform.hpp"

namespace cradon::distributions {

struct PointMass {
    Point at{cplx(0, 0), cplx(0, 0)};
    cplx weight{1.0, 0.0};
};

// One term d^p dbar^q mu with mu either a point mass or a density.
struct DistTerm {
    MultiIndex p{};
    MultiIndex q{};
    std::optional<PointMass> point;
    std::optional<fields::TestFunction> density;
};

class TestDistribution {
  public:
    explicit TestDistribution(std::vector<DistTerm> terms) : terms_(std::move(terms)) {
        if (terms_.empty())
            throw std::invalid_argument("TestDistribution: needs at least one term");
        for (const DistTerm& t : terms_) {
            if (t.p.order() + t.q.order() > 2 || t.p[0] < 0 || t.p[1] < 0 || t.q[0] < 0 ||
                t.q[1] < 0)
                throw std::invalid_argument("TestDistribution: |p| + |q| must be within [0, 2]");
            if (t.point.has_value() == t.density.has_value())
                throw std::invalid_argument(
                    "TestDistribution: each term carries exactly one measure");
            if (t.point && !is_finite(t.point->weight))
                throw std::invalid_argument("TestDistribution: point mass weight must be finite");
        }
    }

    static TestDistribution delta(Point at, cplx weight = cplx(1, 0), MultiIndex p = {},
                                  MultiIndex q = {}) {
        return TestDistribution({DistTerm{p, q, PointMass{at, weight}, std::nullopt}});
    }
    static TestDistribution density(fields::TestFunction f, MultiIndex p = {},
                                    MultiIndex q = {}) {
        return TestDistribution({DistTerm{p, q, std::nullopt, std::move(f)}});
    }

    const std::vector<DistTerm>& terms() const { return terms_; }

    int max_order() const {
        int m = 0;
        for (const DistTerm& t : terms_) m = std::max(m, t.p.order() + t.q.order());
        return m;
    }

    bool purely_points() const {
        for (const DistTerm& t : terms_)
            if (!t.point) return false;
        return true;
    }

    // distance from z to the union of the term supports (0 if any density has
    // unbounded support)
    double support_distance(const Point& z) const {
        double d = std::numeric_limits<double>::infinity();
        for (const DistTerm& t : terms_) {
            if (t.point) {
                d = std::min(d, norm(z - t.point->at));
            } else if (t.density->compactly_supported()) {
                d = std::min(d, std::max(0.0, norm(z - t.density->center()) - t.density->rho()));
            } else {
                return 0.0;
            }
        }
        return d;
    }

    // radius of a ball about the origin containing the support
    double support_bound() const {
        double r = 0.0;
        for (const DistTerm& t : terms_) {
            if (t.point)
                r = std::max(r, norm(t.point->at));
            else
                r = std::max(r, t.density->support_bound());
        }
        return r;
    }

    // per-term carrier ball; bounded == false marks a Gaussian density, whose
    // center/radius then describe only the effective (decay) scale
    struct Carrier {
        Point center;
        double radius = 0.0;
        bool bounded = true;
    };
    std::vector<Carrier> carriers() const {
        std::vector<Carrier> out;
        out.reserve(terms_.size());
        for (const DistTerm& t : terms_) {
            if (t.point)
                out.push_back({t.point->at, 0.0, true});
            else if (t.density->compactly_supported())
                out.push_back({t.density->center(), t.density->rho(), true});
            else
                out.push_back({t.density->center(), 0.0, false});
        }
        return out;
    }

  private:
    std::vector<DistTerm> terms_;
};

// ---------------------------------------------------------------------------
// Pairing <T, phi> = sum (-1)^{|p|+|q|} int d^p dbar^q phi d mu.

template <typename Phi>
concept WirtingerField = requires(const Phi& f, const Point& z, MultiIndex p, MultiIndex q) {
    { f.wirtinger(z, p, q) } -> std::convertible_to<cplx>;
};

struct DensityQuad {
    double radius = 8.0;  // truncation of density integrals
    int n_r = 20;
    int n_phi = 12;
};

template <WirtingerField Phi>
cplx apply(const TestDistribution& T, const Phi& phi, const DensityQuad& dq = {}) {
    std::optional<numerics::BidiskRule> rule;
    cplx acc{0.0, 0.0};
    for (const DistTerm& t : T.terms()) {
        double sign = ((t.p.order() + t.q.order()) % 2 == 0) ? 1.0 : -1.0;
        if (t.point) {
            acc += sign * t.point->weight * phi.wirtinger(t.point->at, t.p, t.q);
            continue;
        }
        if (!rule) rule = numerics::bidisk_rule(dq.radius, dq.n_r, dq.n_phi);
        const fields::TestFunction& f = *t.density;
        std::vector<cplx> vals(rule->size());
        parallel_for(rule->size(), [&](std::size_t i) {
            const Point& z = rule->points[i];
            cplx fz = f.eval(z);  // skip phi where the density vanishes exactly
            if (fz != cplx(0.0, 0.0)) vals[i] = rule->weights[i] * fz * phi.wirtinger(z, t.p, t.q);
        });
        acc += sign * pairwise_sum(vals);
    }
    if (!is_finite(acc)) throw std::runtime_error("apply: non-finite pairing");
    return acc;
}

// ---------------------------------------------------------------------------
// Mollification T_m = T * alpha_m. Point terms differentiate the mollifier
// (the pairing sign and the inner-derivative sign cancel); density terms move
// the derivatives onto the density and convolve.

struct MollifiedDistribution {
    int m = 1;
    transform::VolumeGrid samples;
    std::function<cplx(const Point&)> eval;
};

inline MollifiedDistribution mollify(const TestDistribution& T, int m, double extent,
                                     int count) {
    if (m < 1) throw std::invalid_argument("mollify: m must be >= 1");
    if (!(extent > 0.0)) throw std::invalid_argument("mollify: extent must be > 0");
    if (count < 3 || count % 2 == 0)
        throw std::invalid_argument("mollify: count must be odd and >= 3");
    transform::VolumeGrid V;
    V.extent = extent;
    V.count = count;
    if (V.spacing() > 1.0 / (4.0 * m))
        throw std::invalid_argument(
            "mollify: grid spacing exceeds 1/(4m); the mollifier would be unresolved");
    fields::Mollifier alpha(m);
    std::vector<std::function<cplx(const Point&)>> parts;
    for (const DistTerm& t : T.terms()) {
        if (t.point) {
            PointMass pm = *t.point;
            MultiIndex p = t.p, q = t.q;
            parts.push_back([alpha, pm, p, q](const Point& z) {
                return pm.weight * alpha.wirtinger(z - pm.at, p, q);
            });
        } else {
            fields::TestFunction f = *t.density;
            MultiIndex p = t.p, q = t.q;
            parts.push_back(numerics::convolve_cn(
                [f, p, q](const Point& w) { return f.wirtinger(w, p, q); }, alpha));
        }
    }
    MollifiedDistribution out;
    out.m = m;
    out.eval = [parts = std::move(parts)](const Point& z) {
        cplx acc{0.0, 0.0};
        for (const auto& g : parts) acc += g(z);
        return acc;
    };
    out.samples = V;
    out.samples.values.resize(std::size_t(count) * count * count * count);
    const std::size_t n3 = std::size_t(count) * count * count;
    parallel_for(out.samples.values.size(), [&](std::size_t flat) {
        int i = int(flat / n3);
        int j = int((flat / (count * count)) % count);
        int k = int((flat / count) % count);
        int l = int(flat % count);
        out.samples.values[flat] = out.eval(out.samples.point_at(i, j, k, l));
    });
    // the support may only grow by the mollifier radius
    for (std::size_t flat = 0; flat < out.samples.values.size(); ++flat) {
        if (out.samples.values[flat] == cplx(0, 0)) continue;
        int i = int(flat / n3);
        int j = int((flat / (count * count)) % count);
        int k = int((flat / count) % count);
        int l = int(flat % count);
        Point z = out.samples.point_at(i, j, k, l);
        if (T.support_distance(z) > 1.0 / m + 1e-12)
            throw std::runtime_error("mollify: mollified sample leaked outside supp(T) + 1/m");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Derivatives of the dual transform: the s-derivatives of psi pick up the
// monomial factors w^p wbar^q under the integral,
//     d^p dbar^q [R* psi](z)
//       = int (d^{|p|}/ds^{|p|}) (d^{|q|}/dsbar^{|q|}) psi(w, <z,w>) w^p wbar^q d sigma.

template <typename Psi>
concept SDerivField = requires(const Psi& f, const Point& w, cplx s, int a, int b) {
    { f.s_deriv(w, s, a, b) } -> std::convertible_to<cplx>;
};

template <SDerivField Psi>
cplx dual_of_test(const Psi& psi, const Point& z, MultiIndex p, MultiIndex q,
                  const numerics::SphereGrid& sphere) {
    const int a = p.order(), b = q.order();
    return numerics::integrate_sphere(sphere, [&](const Point& w) {
        cplx val = psi.s_deriv(w, pairing(z, w), a, b);
        for (int k = 0; k < p[0]; ++k) val *= w[0];
        for (int k = 0; k < p[1]; ++k) val *= w[1];
        for (int k = 0; k < q[0]; ++k) val *= std::conj(w[0]);
        for (int k = 0; k < q[1]; ++k) val *= std::conj(w[1]);
        return val;
    });
}

// R* psi packaged as a field with Wirtinger derivatives, for pairing against
// distributions.
template <SDerivField Psi>
struct DualField {
    const Psi* psi = nullptr;
    const numerics::SphereGrid* sphere = nullptr;
    cplx eval(const Point& z) const { return wirtinger(z, MultiIndex{}, MultiIndex{}); }
    cplx wirtinger(const Point& z, MultiIndex p, MultiIndex q) const {
        return dual_of_test(*psi, z, p, q, *sphere);
    }
};

// <RT, psi> = <T, R* psi>. psi must be compactly supported in s so that
// R* psi and its derivatives stay bounded.
template <typename Psi>
    requires SDerivField<Psi> && requires(const Psi& f) {
        { f.s_support_radius() } -> std::convertible_to<double>;
    }
cplx radon_pair(const TestDistribution& T, const Psi& psi,
                const numerics::SphereGrid& sphere, const DensityQuad& dq = {}) {
    if (!(psi.s_support_radius() < std::numeric_limits<double>::infinity()))
        throw std::invalid_argument("radon_pair: psi must be compactly supported in s");
    DualField<Psi> rstar{&psi, &sphere};
    return apply(T, rstar, dq);
}

}  // namespace cradon::distributions
