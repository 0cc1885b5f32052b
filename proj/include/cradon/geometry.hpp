#pragma once

// Complex hyperplanes in C^2, compact sets with exact projection formulas,
// raster projections, hat-set predicates, connectivity of raster complements,
// and broken-line escape paths with a clearance guarantee.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>

#include "cradon/core.hpp"

namespace cradon::geometry {

// ---------------------------------------------------------------------------
// Hyperplane {z : <z,xi> = s}, stored canonically.
//
// (xi, s) and (xi e^{i theta}, s e^{i theta}) describe the same plane. The
// canonical representative has |xi| = 1 and: offset real >= 0 when nonzero,
// else first nonzero normal coordinate real > 0. Quarter-turn phases land on
// bitwise-identical canonical forms because multiplication by i only swaps
// and negates components.

class Hyperplane {
  public:
    Hyperplane(Point normal, cplx offset) {
        double nn = std::sqrt(norm_sq(normal));
        if (!(nn > 0.0) || !is_finite(normal[0]) || !is_finite(normal[1]))
            throw std::invalid_argument("Hyperplane: normal must be nonzero and finite");
        normal_ = Point{normal[0] / nn, normal[1] / nn};
        offset_ = offset / nn;
        double so = std::abs(offset_);
        if (so > 0.0) {
            cplx phase = std::conj(offset_) / so;
            normal_ = phase * normal_;
            offset_ = cplx(so, 0.0);
        } else {
            offset_ = cplx(0.0, 0.0);
            int j = (std::abs(normal_[0]) > 0.0) ? 0 : 1;
            double aj = std::abs(normal_[j]);
            cplx phase = std::conj(normal_[j]) / aj;
            normal_ = phase * normal_;
            normal_[j] = cplx(aj, 0.0);
        }
    }

    const Point& normal() const { return normal_; }
    cplx offset() const { return offset_; }

    // Residual of a point against the plane equation.
    double residual(const Point& z) const { return std::abs(pairing(z, normal_) - offset_); }

  private:
    Point normal_;
    cplx offset_;
};

// ---------------------------------------------------------------------------
// CompactSet: membership + exact Euclidean distance + exact projection
// distance onto any complex direction, for a closed family of shapes.

class CompactSet {
  public:
    enum class Kind { ball, point, polydisc, annulus2d, union_set, dilation };

    static CompactSet ball(Point center, double radius) {
        if (!(radius >= 0.0)) throw std::invalid_argument("ball: radius must be >= 0");
        CompactSet k(Kind::ball);
        k.center_ = center;
        k.r1_ = radius;
        return k;
    }
    static CompactSet point(Point at) {
        CompactSet k(Kind::point);
        k.center_ = at;
        return k;
    }
    static CompactSet polydisc(Point center, double r1, double r2) {
        if (!(r1 >= 0.0 && r2 >= 0.0))
            throw std::invalid_argument("polydisc: radii must be >= 0");
        CompactSet k(Kind::polydisc);
        k.center_ = center;
        k.r1_ = r1;
        k.r2_ = r2;
        return k;
    }
    // {(z1, 0) : rin <= |z1| <= rout} -- a two-real-dimensional ring embedded
    // in the z2 = 0 slice. Not linearly convex; used as the stress fixture.
    static CompactSet annulus2d(double rin, double rout) {
        if (!(0.0 < rin && rin < rout))
            throw std::invalid_argument("annulus2d: need 0 < rin < rout");
        CompactSet k(Kind::annulus2d);
        k.r1_ = rin;
        k.r2_ = rout;
        return k;
    }
    static CompactSet union_of(std::vector<CompactSet> parts) {
        if (parts.empty()) throw std::invalid_argument("union_of: needs at least one part");
        CompactSet k(Kind::union_set);
        k.parts_ = std::move(parts);
        return k;
    }
    static CompactSet dilation_of(CompactSet base, double eps) {
        if (!(eps > 0.0)) throw std::invalid_argument("dilate: eps must be > 0");
        CompactSet k(Kind::dilation);
        k.parts_.push_back(std::move(base));
        k.r1_ = eps;
        return k;
    }

    Kind kind() const { return kind_; }
    double eps() const { return r1_; }  // meaningful for dilation

    // Exact Euclidean distance to the set (0 on the set).
    double distance(const Point& z) const {
        switch (kind_) {
            case Kind::ball:
                return std::max(0.0, norm(z - center_) - r1_);
            case Kind::point:
                return norm(z - center_);
            case Kind::polydisc: {
                double d1 = std::max(0.0, std::abs(z[0] - center_[0]) - r1_);
                double d2 = std::max(0.0, std::abs(z[1] - center_[1]) - r2_);
                return std::hypot(d1, d2);
            }
            case Kind::annulus2d: {
                double a = std::abs(z[0]);
                double dr = (a < r1_) ? r1_ - a : (a > r2_ ? a - r2_ : 0.0);
                return std::hypot(dr, std::abs(z[1]));
            }
            case Kind::union_set: {
                double d = std::numeric_limits<double>::infinity();
                for (const auto& p : parts_) d = std::min(d, p.distance(z));
                return d;
            }
            case Kind::dilation:
                return std::max(0.0, parts_[0].distance(z) - r1_);
        }
        return 0.0;
    }

    bool contains(const Point& z) const { return distance(z) <= 0.0; }

    // Radius of a ball at the origin that contains the set.
    double bound() const {
        switch (kind_) {
            case Kind::ball:
                return norm(center_) + r1_;
            case Kind::point:
                return norm(center_);
            case Kind::polydisc:
                return std::hypot(std::abs(center_[0]) + r1_, std::abs(center_[1]) + r2_);
            case Kind::annulus2d:
                return r2_;
            case Kind::union_set: {
                double b = 0.0;
                for (const auto& p : parts_) b = std::max(b, p.bound());
                return b;
            }
            case Kind::dilation:
                return parts_[0].bound() + r1_;
        }
        return 0.0;
    }

    // Exact distance from s to the projection {<z,w> : z in K}; w unit.
    //
    // A ball projects to a disk of the same radius (take z = c + t conj(w));
    // a polydisc to a disk of radius r1|w1| + r2|w2|; the embedded annulus to
    // the annulus scaled by |w1| (a point when w1 = 0). Dilating K by eps
    // dilates every projection by the same eps.
    double proj_dist(const Point& w, const cplx& s) const {
        switch (kind_) {
            case Kind::ball:
                return std::max(0.0, std::abs(s - pairing(center_, w)) - r1_);
            case Kind::point:
                return std::abs(s - pairing(center_, w));
            case Kind::polydisc: {
                double r = r1_ * std::abs(w[0]) + r2_ * std::abs(w[1]);
                return std::max(0.0, std::abs(s - pairing(center_, w)) - r);
            }
            case Kind::annulus2d: {
                double a = std::abs(w[0]);
                if (a == 0.0) return std::abs(s);
                double d = std::abs(s);
                if (d < r1_ * a) return r1_ * a - d;
                if (d > r2_ * a) return d - r2_ * a;
                return 0.0;
            }
            case Kind::union_set: {
                double d = std::numeric_limits<double>::infinity();
                for (const auto& p : parts_) d = std::min(d, p.proj_dist(w, s));
                return d;
            }
            case Kind::dilation:
                return std::max(0.0, parts_[0].proj_dist(w, s) - r1_);
        }
        return 0.0;
    }

    // Boundary-biased point cloud used by the raster fallback and by
    // brute-force cross checks. Deterministic for a fixed seed.
    std::vector<Point> sample_cloud(std::size_t n, std::uint64_t seed = 0x5eed) const {
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (std::uint64_t(kind_) + 1)));
        std::vector<Point> out;
        out.reserve(n);
        append_cloud(out, n, rng);
        return out;
    }

  private:
    explicit CompactSet(Kind k) : kind_(k) {}

    static Point unit4(std::mt19937_64& rng) {
        std::normal_distribution<double> nd(0.0, 1.0);
        for (;;) {
            Point v{cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))};
            double nn = norm(v);
            if (nn > 1e-6) return Point{v[0] / nn, v[1] / nn};
        }
    }

    void append_cloud(std::vector<Point>& out, std::size_t n, std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> uu(0.0, 1.0);
        switch (kind_) {
            case Kind::ball:
                for (std::size_t i = 0; i < n; ++i) {
                    Point d = unit4(rng);
                    // half on the boundary sphere, half volume-biased outward
                    double r = (i % 2 == 0) ? r1_ : r1_ * std::pow(uu(rng), 0.25);
                    out.push_back(center_ + r * d);
                }
                break;
            case Kind::point:
                for (std::size_t i = 0; i < n; ++i) out.push_back(center_);
                break;
            case Kind::polydisc:
                for (std::size_t i = 0; i < n; ++i) {
                    double a1 = two_pi * uu(rng), a2 = two_pi * uu(rng);
                    double q1 = (i % 2 == 0) ? r1_ : r1_ * std::sqrt(uu(rng));
                    double q2 = (i % 4 < 2) ? r2_ : r2_ * std::sqrt(uu(rng));
                    out.push_back(center_ +
                                  Point{std::polar(q1, a1), std::polar(q2, a2)});
                }
                break;
            case Kind::annulus2d:
                for (std::size_t i = 0; i < n; ++i) {
                    double a = two_pi * uu(rng);
                    double r;
                    if (i % 4 == 0) r = r1_;
                    else if (i % 4 == 1) r = r2_;
                    else r = r1_ + (r2_ - r1_) * uu(rng);
                    out.push_back(Point{std::polar(r, a), cplx(0.0, 0.0)});
                }
                break;
            case Kind::union_set: {
                std::size_t per = std::max<std::size_t>(1, n / parts_.size());
                for (const auto& p : parts_) p.append_cloud(out, per, rng);
                break;
            }
            case Kind::dilation: {
                std::size_t half = n;
                std::vector<Point> base;
                parts_[0].append_cloud(base, half, rng);
                for (std::size_t i = 0; i < base.size(); ++i) {
                    Point d = unit4(rng);
                    double r = (i % 2 == 0) ? r1_ : r1_ * std::pow(uu(rng), 0.25);
                    out.push_back(base[i] + r * d);
                }
                break;
            }
        }
    }

    Kind kind_;
    Point center_{cplx(0, 0), cplx(0, 0)};
    double r1_ = 0.0, r2_ = 0.0;
    std::vector<CompactSet> parts_;
};

inline CompactSet dilate(const CompactSet& k, double eps) {
    return CompactSet::dilation_of(k, eps);
}

// ---------------------------------------------------------------------------
// ProjectionRegion: boolean raster over a square window of C.

struct ProjectionRegion {
    cplx center{0.0, 0.0};
    double half_width = 0.0;
    int resolution = 0;  // cells per side
    std::vector<std::uint8_t> bitmap;  // row-major; row = Im, col = Re

    double cell() const { return 2.0 * half_width / resolution; }
    double half_diag() const { return cell() * std::sqrt(2.0) / 2.0; }

    cplx cell_center(int row, int col) const {
        double h = cell();
        return center + cplx(-half_width + (col + 0.5) * h, -half_width + (row + 0.5) * h);
    }
    bool at(int row, int col) const { return bitmap[std::size_t(row) * resolution + col] != 0; }
    void set(int row, int col, bool v) {
        bitmap[std::size_t(row) * resolution + col] = v ? 1 : 0;
    }
    // grid indices of the cell containing s (clamped to the window)
    std::pair<int, int> locate(const cplx& s) const {
        double h = cell();
        int col = int(std::floor((s.real() - center.real() + half_width) / h));
        int row = int(std::floor((s.imag() - center.imag() + half_width) / h));
        col = std::clamp(col, 0, resolution - 1);
        row = std::clamp(row, 0, resolution - 1);
        return {row, col};
    }

    bool border_has_true() const {
        for (int i = 0; i < resolution; ++i)
            if (at(0, i) || at(resolution - 1, i) || at(i, 0) || at(i, resolution - 1))
                return true;
        return false;
    }

    std::size_t true_count() const {
        std::size_t c = 0;
        for (auto b : bitmap) c += b;
        return c;
    }
};

// Raster of the exact projection: a cell is marked when its center lies
// within half a cell diagonal of the projection set.
inline ProjectionRegion project(const CompactSet& K, const Point& w, int resolution) {
    if (resolution < 16) throw std::invalid_argument("project: resolution must be >= 16");
    if (std::abs(norm(w) - 1.0) > 1e-9)
        throw std::invalid_argument("project: direction must be a unit vector");
    ProjectionRegion P;
    double R = K.bound();
    P.center = cplx(0.0, 0.0);
    P.half_width = 1.1 * R + 0.5;
    P.resolution = resolution;
    P.bitmap.assign(std::size_t(resolution) * resolution, 0);
    double hd = P.half_diag();
    for (int r = 0; r < resolution; ++r)
        for (int c = 0; c < resolution; ++c)
            if (K.proj_dist(w, P.cell_center(r, c)) <= hd) P.set(r, c, true);
    return P;
}

// Raster built from a projected point cloud instead of the exact formula.
// Used to cross-validate the exact projections.
inline ProjectionRegion project_cloud(const CompactSet& K, const Point& w, int resolution,
                                      std::size_t samples = 200000,
                                      std::uint64_t seed = 0x5eed) {
    if (resolution < 16) throw std::invalid_argument("project_cloud: resolution must be >= 16");
    if (std::abs(norm(w) - 1.0) > 1e-9)
        throw std::invalid_argument("project_cloud: direction must be a unit vector");
    ProjectionRegion P;
    double R = K.bound();
    P.center = cplx(0.0, 0.0);
    P.half_width = 1.1 * R + 0.5;
    P.resolution = resolution;
    P.bitmap.assign(std::size_t(resolution) * resolution, 0);
    for (const Point& z : K.sample_cloud(samples, seed)) {
        auto [r, c] = P.locate(pairing(z, w));
        P.set(r, c, true);
    }
    return P;
}

// ---------------------------------------------------------------------------
// Hat-set predicates: does the hyperplane (w, s) meet K (within tol)?

inline bool hat_contains(const CompactSet& K, const Hyperplane& H, double tol) {
    if (tol < 0.0) throw std::invalid_argument("hat_contains: tol must be >= 0");
    return K.proj_dist(H.normal(), H.offset()) <= tol;
}

inline bool hat_dilate_contains(const CompactSet& K, int m, const Hyperplane& H) {
    if (m < 1) throw std::invalid_argument("hat_dilate_contains: m must be >= 1");
    return K.proj_dist(H.normal(), H.offset()) <= 1.0 / m;
}

// ---------------------------------------------------------------------------
// Connectivity of the raster complement.
//
// False cells use 4-connectivity, true cells 8-connectivity, so a diagonal
// chain of set cells cannot be leaked through. The window must have an
// all-false border ring.

inline bool complement_connected(const ProjectionRegion& P) {
    const int n = P.resolution;
    if (n < 3) throw std::invalid_argument("complement_connected: window too small");
    if (P.border_has_true())
        throw std::invalid_argument(
            "complement_connected: true cells touch the window border; enlarge the window");
    std::vector<std::uint8_t> seen(P.bitmap.size(), 0);
    std::queue<std::pair<int, int>> q;
    auto push = [&](int r, int c) {
        std::size_t i = std::size_t(r) * n + c;
        if (!P.bitmap[i] && !seen[i]) {
            seen[i] = 1;
            q.emplace(r, c);
        }
    };
    for (int i = 0; i < n; ++i) {
        push(0, i);
        push(n - 1, i);
        push(i, 0);
        push(i, n - 1);
    }
    while (!q.empty()) {
        auto [r, c] = q.front();
        q.pop();
        if (r > 0) push(r - 1, c);
        if (r + 1 < n) push(r + 1, c);
        if (c > 0) push(r, c - 1);
        if (c + 1 < n) push(r, c + 1);
    }
    for (std::size_t i = 0; i < P.bitmap.size(); ++i)
        if (!P.bitmap[i] && !seen[i]) return false;
    return true;
}

// Independent component counter (union-find) used as an oracle against the
// flood fill. count_true: 8-connected components of the set; otherwise
// 4-connected components of the complement including a virtual outer frame.
inline int component_count(const ProjectionRegion& P, bool count_true) {
    const int n = P.resolution;
    const std::size_t frame = std::size_t(n) * n;  // virtual node for the outside
    std::vector<std::size_t> parent(frame + 1);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

    auto want = [&](int r, int c) { return P.at(r, c) == count_true; };
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (!want(r, c)) continue;
            std::size_t i = std::size_t(r) * n + c;
            if (!count_true && (r == 0 || c == 0 || r == n - 1 || c == n - 1))
                unite(i, frame);
            auto link = [&](int rr, int cc) {
                if (rr >= 0 && cc >= 0 && rr < n && cc < n && want(rr, cc))
                    unite(i, std::size_t(rr) * n + cc);
            };
            link(r - 1, c);
            link(r, c - 1);
            if (count_true) {
                link(r - 1, c - 1);
                link(r - 1, c + 1);
            }
        }
    std::vector<std::size_t> roots;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (want(r, c)) roots.push_back(find(std::size_t(r) * n + c));
    if (!count_true) roots.push_back(find(frame));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return int(roots.size());
}

// ---------------------------------------------------------------------------
// Linear convexity as an evidence procedure: for each probe outside K, sweep
// the direction grid for a hyperplane through the probe missing K.

struct ConvexityReport {
    int witnessed = 0;
    std::vector<std::size_t> failed;                   // probe indices with no witness
    std::vector<std::optional<Hyperplane>> witnesses;  // per probe
    std::vector<std::string> diagnostics;
};

inline ConvexityReport is_linearly_convex(const CompactSet& K, std::span<const Point> probes,
                                          std::span<const Point> directions) {
    ConvexityReport rep;
    rep.witnesses.resize(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Point& z = probes[i];
        if (K.contains(z)) {
            rep.failed.push_back(i);
            rep.diagnostics.push_back("probe " + std::to_string(i) +
                                      " lies inside the set; skipped");
            continue;
        }
        bool found = false;
        for (const Point& w : directions) {
            if (K.proj_dist(w, pairing(z, w)) > 0.0) {
                rep.witnesses[i] = Hyperplane(w, pairing(z, w));
                ++rep.witnessed;
                found = true;
                break;
            }
        }
        if (!found) {
            rep.failed.push_back(i);
            rep.diagnostics.push_back("probe " + std::to_string(i) +
                                      ": no separating direction on the grid");
        }
    }
    return rep;
}

struct SeparationResult {
    bool found = false;
    std::optional<Hyperplane> plane;
    Point direction{cplx(0, 0), cplx(0, 0)};  // grid direction before canonicalization
    bool complement_is_connected = false;
};

// A strictly positive separation can still be narrower than a raster cell, in
// which case the connectivity verdict of the projection would be computed on
// a raster that cannot resolve it. The sweep therefore skips directions whose
// separation margin falls under two cell diagonals of the raster it is about
// to build (pass margin = 0 to disable).
inline SeparationResult find_separating_hyperplane(const CompactSet& K, const Point& z0,
                                                   std::span<const Point> directions,
                                                   int resolution,
                                                   std::optional<double> margin = std::nullopt) {
    if (K.contains(z0))
        throw std::invalid_argument("find_separating_hyperplane: z0 lies inside K");
    double need = margin.value_or(2.0 * std::sqrt(2.0) * (2.0 * (1.1 * K.bound() + 0.5)) /
                                  resolution);
    SeparationResult res;
    for (const Point& w : directions) {
        if (K.proj_dist(w, pairing(z0, w)) > need) {
            res.found = true;
            res.direction = w;
            res.plane = Hyperplane(w, pairing(z0, w));
            res.complement_is_connected = complement_connected(project(K, w, resolution));
            return res;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Escape path: a broken line from s0 to |s| > R keeping clearance > delta
// from the true cells of the raster.

struct BrokenLine {
    std::vector<cplx> vertices;
    double delta = 0.0;  // the clearance it was built against
};

struct EscapeResult {
    bool found = false;
    BrokenLine line;
    double bottleneck = 0.0;  // best achievable min-clearance (conservative)
    std::string note;
};

namespace detail {

// 1D squared distance transform (Felzenszwalb–Huttenlocher lower envelope).
inline void edt_pass(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                     std::vector<double>& zb) {
    const int n = int(f.size());
    int k = 0;
    v[0] = 0;
    zb[0] = -std::numeric_limits<double>::infinity();
    zb[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            s = ((f[q] + q * double(q)) - (f[v[k]] + v[k] * double(v[k]))) /
                (2.0 * q - 2.0 * v[k]);
            if (s <= zb[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        zb[k] = s;
        zb[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (zb[k + 1] < q) ++k;
        double dq = q - double(v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

// Squared distance (in cells) from each cell to the nearest true cell.
inline std::vector<double> squared_edt(const std::vector<std::uint8_t>& occ, int n) {
    const double INF = 1e18;
    std::vector<double> g(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) g[i] = occ[i] ? 0.0 : INF;
    std::vector<double> f(n), d(n), zb(n + 1);
    std::vector<int> v(n);
    // columns
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) f[r] = g[std::size_t(r) * n + c];
        edt_pass(f, d, v, zb);
        for (int r = 0; r < n; ++r) g[std::size_t(r) * n + c] = d[r];
    }
    // rows
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) f[c] = g[std::size_t(r) * n + c];
        edt_pass(f, d, v, zb);
        for (int c = 0; c < n; ++c) g[std::size_t(r) * n + c] = d[c];
    }
    return g;
}

}  // namespace detail

inline EscapeResult escape_path(const ProjectionRegion& A, cplx s0, double R, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("escape_path: delta must be >= 0");
    if (!(R > 0.0)) throw std::invalid_argument("escape_path: R must be > 0");
    if (std::abs(A.center) > 1e-12)
        throw std::invalid_argument("escape_path: raster window must be centered at 0");

    const double h = A.cell();
    const double hd = A.half_diag();

    // Extended raster sharing the cell size, wide enough to hold |s| <= R
    // plus working margin. A's true cells are copied across by position.
    const int M = int(std::ceil((std::max(R, std::max(A.half_width, std::abs(s0))) + 4.0 * h +
                                 delta) /
                                h)) +
                  2;
    const int n = 2 * M;
    const double W = M * h;
    std::vector<std::uint8_t> occ(std::size_t(n) * n, 0);
    auto locate = [&](const cplx& s) {
        int col = std::clamp(int(std::floor((s.real() + W) / h)), 0, n - 1);
        int row = std::clamp(int(std::floor((s.imag() + W) / h)), 0, n - 1);
        return std::pair<int, int>{row, col};
    };
    auto cell_center = [&](int row, int col) {
        return cplx(-W + (col + 0.5) * h, -W + (row + 0.5) * h);
    };
    bool any_true = false;
    for (int r = 0; r < A.resolution; ++r)
        for (int c = 0; c < A.resolution; ++c)
            if (A.at(r, c)) {
                auto [rr, cc] = locate(A.cell_center(r, c));
                occ[std::size_t(rr) * n + cc] = 1;
                any_true = true;
            }

    // Conservative clearance of a cell: center-to-center distance to the
    // nearest true cell minus half its diagonal.
    std::vector<double> edt;
    if (any_true) edt = detail::squared_edt(occ, n);
    auto clearance = [&](int row, int col) {
        if (!any_true) return std::numeric_limits<double>::infinity();
        return h * std::sqrt(edt[std::size_t(row) * n + col]) - hd;
    };

    auto [sr, sc] = locate(s0);
    EscapeResult out;
    out.line.delta = delta;

    // Cell-level guarantee: if every path cell clears delta + h/2, then every
    // point of the polyline through adjacent cell centers clears delta.
    const double delta_eff = delta + 0.5 * h;

    if (clearance(sr, sc) <= delta_eff) {
        out.note = "start point has no clearance margin at this resolution";
        out.bottleneck = std::max(0.0, clearance(sr, sc));
        return out;
    }

    // Widest-path search: maximize the minimal clearance along the route.
    const double NEG = -std::numeric_limits<double>::infinity();
    std::vector<double> best(std::size_t(n) * n, NEG);
    std::vector<int> parent(std::size_t(n) * n, -1);
    using QE = std::pair<double, int>;
    std::priority_queue<QE> pq;
    int start = sr * n + sc;
    best[start] = clearance(sr, sc);
    pq.push({best[start], start});
    auto is_target = [&](int row, int col) { return std::abs(cell_center(row, col)) > R + h; };
    int goal = -1;
    double goal_bn = NEG;
    const int dr4[4] = {-1, 1, 0, 0};
    const int dc4[4] = {0, 0, -1, 1};
    while (!pq.empty()) {
        auto [bn, idx] = pq.top();
        pq.pop();
        if (bn < best[idx]) continue;
        int row = idx / n, col = idx % n;
        if (is_target(row, col)) {
            goal = idx;
            goal_bn = bn;
            break;
        }
        for (int k = 0; k < 4; ++k) {
            int rr = row + dr4[k], cc = col + dc4[k];
            if (rr < 0 || cc < 0 || rr >= n || cc >= n) continue;
            double nb = std::min(bn, clearance(rr, cc));
            int j = rr * n + cc;
            if (nb > best[j]) {
                best[j] = nb;
                parent[j] = idx;
                pq.push({nb, j});
            }
        }
    }

    if (goal < 0 || goal_bn <= delta_eff) {
        out.bottleneck = std::max(0.0, goal_bn == NEG ? 0.0 : goal_bn);
        out.note = "no route clears delta; best achievable clearance is " +
                   std::to_string(out.bottleneck);
        return out;
    }

    // Reconstruct cell-center path, then straighten it greedily: a shortcut
    // is accepted when every sample along it sits in a cell whose clearance
    // exceeds delta by a margin covering the in-cell position error.
    std::vector<cplx> pts;
    for (int idx = goal; idx >= 0; idx = parent[idx]) pts.push_back(cell_center(idx / n, idx % n));
    std::reverse(pts.begin(), pts.end());
    pts.insert(pts.begin(), s0);

    auto segment_clear = [&](const cplx& a, const cplx& b) {
        double len = std::abs(b - a);
        int steps = std::max(2, int(std::ceil(len / (h / 4.0))));
        for (int i = 0; i <= steps; ++i) {
            cplx p = a + (double(i) / steps) * (b - a);
            auto [r, c] = locate(p);
            if (!(clearance(r, c) > delta + hd + 0.25 * h)) return false;
        }
        return true;
    };
    std::vector<cplx> simp;
    simp.push_back(pts.front());
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
        std::size_t j = pts.size() - 1;
        while (j > i + 1 && !segment_clear(pts[i], pts[j])) --j;
        simp.push_back(pts[j]);
        i = j;
    }
    if (simp.size() < 2) simp.push_back(pts.back());

    out.found = true;
    out.bottleneck = goal_bn;
    out.line.vertices = std::move(simp);
    return out;
}

}  // namespace cradon::geometry
