#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>

#include "cradon/geometry.hpp"
#include "cradon/numerics.hpp"

using namespace cradon;
using namespace cradon::geometry;

namespace {

bool bitwise_equal(const Hyperplane& a, const Hyperplane& b) {
    auto same = [](cplx x, cplx y) {
        return std::memcmp(&x, &y, sizeof(cplx)) == 0;
    };
    return same(a.normal()[0], b.normal()[0]) && same(a.normal()[1], b.normal()[1]) &&
           same(a.offset(), b.offset());
}

double dist_close(const Hyperplane& a, const Hyperplane& b) {
    return std::abs(a.normal()[0] - b.normal()[0]) + std::abs(a.normal()[1] - b.normal()[1]) +
           std::abs(a.offset() - b.offset());
}

// exact distance from a point to the union of true cell squares of a raster
double dist_to_true_cells(const ProjectionRegion& P, cplx p) {
    double h = P.cell();
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < P.resolution; ++r)
        for (int c = 0; c < P.resolution; ++c) {
            if (!P.at(r, c)) continue;
            cplx cc = P.cell_center(r, c);
            double dx = std::max(0.0, std::abs(p.real() - cc.real()) - h / 2);
            double dy = std::max(0.0, std::abs(p.imag() - cc.imag()) - h / 2);
            best = std::min(best, std::hypot(dx, dy));
        }
    return best;
}

}  // namespace

TEST_CASE("hyperplane canonical form") {
    Hyperplane H(Point{cplx(3, 4), cplx(0, 0)}, cplx(10, 0));
    REQUIRE(std::abs(norm(H.normal()) - 1.0) < 1e-12);
    REQUIRE(H.offset().imag() == 0.0);
    REQUIRE(H.offset().real() == Catch::Approx(2.0));  // 10 / |(3,4)|

    // offset zero: first nonzero normal coordinate becomes real positive
    Hyperplane H0(Point{cplx(0, 0), cplx(0, -2)}, cplx(0, 0));
    REQUIRE(H0.offset() == cplx(0, 0));
    REQUIRE(H0.normal()[1].real() == Catch::Approx(1.0));
    REQUIRE(std::abs(H0.normal()[1].imag()) < 1e-15);

    REQUIRE_THROWS_AS(Hyperplane(Point{cplx(0, 0), cplx(0, 0)}, cplx(1, 0)),
                      std::invalid_argument);
}

TEST_CASE("canonicalization collapses the phase orbit") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        Point xi{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        if (norm(xi) < 0.1) continue;
        cplx s(u(rng), u(rng));
        Hyperplane base(xi, s);

        // quarter turns are exact in floating point: bitwise identical
        for (cplx ph : {cplx(0, 1), cplx(-1, 0), cplx(0, -1)}) {
            Hyperplane rot(Point{ph * xi[0], ph * xi[1]}, ph * s);
            REQUIRE(bitwise_equal(base, rot));
        }

        // generic phases agree to rounding
        double th = pi * u(rng);
        cplx ph = std::polar(1.0, th);
        Hyperplane rot(Point{ph * xi[0], ph * xi[1]}, ph * s);
        REQUIRE(dist_close(base, rot) < 1e-12);
    }
}

TEST_CASE("hyperplane residual vanishes on constructed points") {
    Hyperplane H(Point{cplx(0.3, -0.4), cplx(0.5, 0.7)}, cplx(-0.9, 0.4));
    const Point& xi = H.normal();
    Point eta{-xi[1], xi[0]};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 50; ++k) {
        cplx t(u(rng), u(rng));
        Point z = Point{H.offset() * std::conj(xi[0]), H.offset() * std::conj(xi[1])} + t * eta;
        REQUIRE(H.residual(z) < 1e-12);
    }
}

TEST_CASE("compact set membership, distance, bound") {
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    REQUIRE(B.contains(Point{cplx(0.5, 0), cplx(0, 0.5)}));
    REQUIRE(B.contains(Point{cplx(1, 0), cplx(0, 0)}));
    REQUIRE_FALSE(B.contains(Point{cplx(1.01, 0), cplx(0, 0)}));
    REQUIRE(B.distance(Point{cplx(2, 0), cplx(0, 0)}) == Catch::Approx(1.0));
    REQUIRE(B.bound() == Catch::Approx(1.0));

    CompactSet P = CompactSet::point(Point{cplx(2, 0), cplx(0, 0)});
    REQUIRE(P.bound() == Catch::Approx(2.0));
    REQUIRE(P.distance(Point{cplx(2, 0), cplx(0, 1)}) == Catch::Approx(1.0));

    CompactSet A = CompactSet::annulus2d(0.5, 1.0);
    REQUIRE(A.contains(Point{cplx(0.7, 0), cplx(0, 0)}));
    REQUIRE_FALSE(A.contains(Point{cplx(0.7, 0), cplx(0, 0.01)}));
    REQUIRE_FALSE(A.contains(Point{cplx(0.2, 0), cplx(0, 0)}));
    REQUIRE(A.distance(Point{cplx(0, 0), cplx(0, 0)}) == Catch::Approx(0.5));
    REQUIRE(A.bound() == Catch::Approx(1.0));

    CompactSet D = CompactSet::polydisc(Point{cplx(0, 0), cplx(0, 0)}, 1.0, 0.5);
    REQUIRE(D.contains(Point{cplx(0.9, 0), cplx(0.4, 0)}));
    REQUIRE_FALSE(D.contains(Point{cplx(0.9, 0), cplx(0.6, 0)}));
    REQUIRE(D.bound() == Catch::Approx(std::hypot(1.0, 0.5)));

    REQUIRE_THROWS_AS(CompactSet::annulus2d(1.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, -1.0),
                      std::invalid_argument);
}

TEST_CASE("exact projections: ball, point, polydisc, annulus") {
    // ball about the origin projects to the disk of the same radius
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    Point e1{cplx(1, 0), cplx(0, 0)};
    REQUIRE(B.proj_dist(e1, cplx(0.5, 0)) == 0.0);
    REQUIRE(B.proj_dist(e1, cplx(2, 0)) == Catch::Approx(1.0));

    // point (2,0): projection is {2 w1}
    CompactSet P = CompactSet::point(Point{cplx(2, 0), cplx(0, 0)});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        Point w{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        double nw = norm(w);
        if (nw < 0.1) continue;
        w = Point{w[0] / nw, w[1] / nw};
        cplx s(u(rng), u(rng));
        REQUIRE(P.proj_dist(w, s) == Catch::Approx(std::abs(s - 2.0 * w[0])).margin(1e-13));
    }

    // embedded annulus: scaled annulus for w1 != 0, the origin point for w1 = 0
    CompactSet A = CompactSet::annulus2d(0.5, 1.0);
    REQUIRE(A.proj_dist(e1, cplx(0, 0)) == Catch::Approx(0.5));
    REQUIRE(A.proj_dist(e1, cplx(0.75, 0)) == 0.0);
    REQUIRE(A.proj_dist(e1, cplx(1.2, 0)) == Catch::Approx(0.2));
    Point e2{cplx(0, 0), cplx(1, 0)};
    REQUIRE(A.proj_dist(e2, cplx(0.3, -0.4)) == Catch::Approx(0.5));

    // polydisc projects to a disk of radius r1|w1| + r2|w2|
    CompactSet D = CompactSet::polydisc(Point{cplx(0, 0), cplx(0, 0)}, 1.0, 0.5);
    Point wd{cplx(std::sqrt(0.5), 0), cplx(0, std::sqrt(0.5))};
    double rd = 1.0 * std::sqrt(0.5) + 0.5 * std::sqrt(0.5);
    REQUIRE(D.proj_dist(wd, cplx(0, 0)) == 0.0);
    REQUIRE(D.proj_dist(wd, cplx(2, 0)) == Catch::Approx(2.0 - rd));
}

TEST_CASE("projection distance cross-validated by brute force") {
    CompactSet K = CompactSet::ball(Point{cplx(0.3, 0.0), cplx(0.2, -0.1)}, 0.7);
    auto cloud = K.sample_cloud(10000);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
        Point xi{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        if (norm(xi) < 0.1) continue;
        Hyperplane H(xi, cplx(u(rng) * 2, u(rng) * 2));
        double exact = K.proj_dist(H.normal(), H.offset());
        double bf = std::numeric_limits<double>::infinity();
        for (const Point& z : cloud)
            bf = std::min(bf, std::abs(pairing(z, H.normal()) - H.offset()));
        REQUIRE(bf >= exact - 1e-12);   // the cloud lies inside K
        REQUIRE(bf - exact < 0.05);     // and comes close to the infimum
        // predicate agreement away from the knife edge
        if (std::abs(exact - 0.1) > 0.05)
            REQUIRE(hat_contains(K, H, 0.1) == (exact <= 0.1));
        ++checked;
    }
    REQUIRE(checked >= 90);
}

TEST_CASE("dilation: balls fatten, separated points stay separated") {
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    CompactSet B15 = dilate(B, 0.5);
    REQUIRE(B15.bound() == Catch::Approx(1.5));
    REQUIRE(B15.contains(Point{cplx(1.5, 0), cplx(0, 0)}));
    REQUIRE_FALSE(B15.contains(Point{cplx(1.51, 0), cplx(0, 0)}));

    Point p{cplx(0, 0), cplx(0, 0)}, q{cplx(1, 0), cplx(0, 0)};
    CompactSet two = CompactSet::union_of({CompactSet::point(p), CompactSet::point(q)});
    CompactSet fat = dilate(two, 0.3);
    REQUIRE(fat.contains(Point{cplx(0.3, 0), cplx(0, 0)}));
    REQUIRE_FALSE(fat.contains(Point{cplx(0.5, 0), cplx(0, 0)}));  // midpoint stays out

    REQUIRE_THROWS_AS(dilate(B, 0.0), std::invalid_argument);
}

TEST_CASE("hat_dilate_contains matches hat_contains of the dilation") {
    CompactSet K = CompactSet::ball(Point{cplx(0.2, 0.1), cplx(-0.3, 0)}, 0.8);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        Point xi{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        if (norm(xi) < 0.1) continue;
        Hyperplane H(xi, cplx(2 * u(rng), 2 * u(rng)));
        for (int m : {1, 2, 5}) {
            REQUIRE(hat_dilate_contains(K, m, H) ==
                    hat_contains(dilate(K, 1.0 / m), H, 0.0));
        }
    }
    CompactSet O = CompactSet::point(Point{cplx(0, 0), cplx(0, 0)});
    REQUIRE(hat_dilate_contains(O, 2, Hyperplane(Point{cplx(1, 0), cplx(0, 0)}, cplx(0.4, 0))));
    REQUIRE_FALSE(
        hat_dilate_contains(O, 2, Hyperplane(Point{cplx(1, 0), cplx(0, 0)}, cplx(0.6, 0))));
    REQUIRE_THROWS_AS(hat_dilate_contains(O, 0, Hyperplane(Point{cplx(1, 0), cplx(0, 0)}, 0.0)),
                      std::invalid_argument);
}

TEST_CASE("raster projection agrees with the exact formula cell by cell") {
    CompactSet B = CompactSet::ball(Point{cplx(0.2, -0.1), cplx(0, 0.3)}, 0.9);
    Point w{cplx(0.6, 0), cplx(0, 0.8)};
    ProjectionRegion P = project(B, w, 64);
    REQUIRE(P.half_width > B.bound());
    double hd = P.half_diag();
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            double d = B.proj_dist(w, P.cell_center(r, c));
            if (P.at(r, c)) REQUIRE(d <= hd + 1e-12);
            else REQUIRE(d > hd - 1e-12);
        }
    REQUIRE_THROWS_AS(project(B, w, 8), std::invalid_argument);
    REQUIRE_THROWS_AS(project(B, Point{cplx(2, 0), cplx(0, 0)}, 64), std::invalid_argument);
}

TEST_CASE("cloud raster sits inside the exact raster and fills its interior") {
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    Point w{cplx(1, 0), cplx(0, 0)};
    ProjectionRegion exact = project(B, w, 64);
    ProjectionRegion cloud = project_cloud(B, w, 64, 200000);
    REQUIRE(exact.resolution == cloud.resolution);
    double hd = exact.half_diag();
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            if (cloud.at(r, c))
                REQUIRE(B.proj_dist(w, cloud.cell_center(r, c)) <= hd + 1e-12);
            // interior cells (strictly inside by a cell diagonal) must be hit
            if (B.proj_dist(w, exact.cell_center(r, c)) == 0.0 &&
                std::abs(exact.cell_center(r, c)) < 1.0 - 2 * hd)
                REQUIRE(cloud.at(r, c));
        }
}

TEST_CASE("complement connectivity: disk true, annulus false, empty true") {
    Point e1{cplx(1, 0), cplx(0, 0)};
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    ProjectionRegion disk = project(B, e1, 64);
    REQUIRE(complement_connected(disk));
    REQUIRE(component_count(disk, false) == 1);
    REQUIRE(component_count(disk, true) == 1);

    CompactSet A = CompactSet::annulus2d(0.5, 1.0);
    ProjectionRegion ring = project(A, e1, 64);
    REQUIRE_FALSE(complement_connected(ring));
    REQUIRE(component_count(ring, false) == 2);
    REQUIRE(component_count(ring, true) == 1);

    ProjectionRegion empty;
    empty.center = cplx(0, 0);
    empty.half_width = 1.0;
    empty.resolution = 32;
    empty.bitmap.assign(32 * 32, 0);
    REQUIRE(complement_connected(empty));
    REQUIRE(component_count(empty, false) == 1);

    ProjectionRegion bad = empty;
    bad.set(0, 5, true);
    REQUIRE_THROWS_AS(complement_connected(bad), std::invalid_argument);
}

TEST_CASE("linear convexity evidence: ball and point witnessed, annulus recorded") {
    numerics::SphereGrid dirs = numerics::sphere_grid(16, 16);
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);

    std::vector<Point> probes;
    for (int k = 0; k < 8; ++k) {
        double th = two_pi * k / 8.0;
        probes.push_back(Point{1.5 * std::polar(1.0, th) * std::sqrt(0.5),
                               1.5 * std::polar(1.0, 0.7 * th) * std::sqrt(0.5)});
    }
    ConvexityReport rep = is_linearly_convex(B, probes, dirs.nodes);
    REQUIRE(rep.witnessed == int(probes.size()));
    REQUIRE(rep.failed.empty());
    for (const auto& wopt : rep.witnesses) {
        REQUIRE(wopt.has_value());
        REQUIRE_FALSE(hat_contains(B, *wopt, 0.0));
    }

    CompactSet O = CompactSet::point(Point{cplx(0, 0), cplx(0, 0)});
    std::vector<Point> one{Point{cplx(1, 0), cplx(0, 0)}};
    REQUIRE(is_linearly_convex(O, one, dirs.nodes).witnessed == 1);

    // the annulus separates the origin, yet fails condition (iii) downstream
    CompactSet A = CompactSet::annulus2d(0.5, 1.0);
    std::vector<Point> origin{Point{cplx(0, 0), cplx(0, 0)}};
    ConvexityReport arep = is_linearly_convex(A, origin, dirs.nodes);
    REQUIRE(arep.witnessed == 1);

    // probe inside the set is reported, not witnessed
    std::vector<Point> inside{Point{cplx(0.2, 0), cplx(0, 0)}};
    ConvexityReport brep = is_linearly_convex(B, inside, dirs.nodes);
    REQUIRE(brep.witnessed == 0);
    REQUIRE(brep.failed.size() == 1);
}

TEST_CASE("separating hyperplane search and the annulus stress case") {
    numerics::SphereGrid dirs = numerics::sphere_grid(16, 16);
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    Point z0{cplx(2, 0), cplx(0, 0)};
    SeparationResult r = find_separating_hyperplane(B, z0, dirs.nodes, 64);
    REQUIRE(r.found);
    REQUIRE(r.plane.has_value());
    REQUIRE(B.proj_dist(r.plane->normal(), r.plane->offset()) > 0.0);
    REQUIRE(r.complement_is_connected);

    CompactSet O = CompactSet::point(Point{cplx(0, 0), cplx(0, 0)});
    SeparationResult r2 =
        find_separating_hyperplane(O, Point{cplx(1, 0), cplx(0, 0)}, dirs.nodes, 64);
    REQUIRE(r2.found);
    REQUIRE(r2.complement_is_connected);

    CompactSet A = CompactSet::annulus2d(0.5, 1.0);
    SeparationResult r3 =
        find_separating_hyperplane(A, Point{cplx(0, 0), cplx(0, 0)}, dirs.nodes, 64);
    REQUIRE(r3.found);
    REQUIRE_FALSE(r3.complement_is_connected);  // the condition-(iii) violation witness

    REQUIRE_THROWS_AS(
        find_separating_hyperplane(B, Point{cplx(0.5, 0), cplx(0, 0)}, dirs.nodes, 64),
        std::invalid_argument);
}

TEST_CASE("escape path: disk, empty window, trapped annulus interior") {
    Point e1{cplx(1, 0), cplx(0, 0)};
    CompactSet B = CompactSet::ball(Point{cplx(0, 0), cplx(0, 0)}, 1.0);
    ProjectionRegion disk = project(B, e1, 64);

    EscapeResult esc = escape_path(disk, cplx(1.5, 0), 3.0, 0.1);
    REQUIRE(esc.found);
    REQUIRE(esc.line.vertices.size() >= 2);
    REQUIRE(esc.line.vertices.front() == cplx(1.5, 0));
    REQUIRE(std::abs(esc.line.vertices.back()) > 3.0);
    // clearance invariant, checked by dense sampling against the true cells
    for (std::size_t i = 0; i + 1 < esc.line.vertices.size(); ++i) {
        cplx a = esc.line.vertices[i], b = esc.line.vertices[i + 1];
        REQUIRE(std::abs(b - a) > 0.0);
        for (int k = 0; k <= 200; ++k) {
            cplx p = a + (double(k) / 200.0) * (b - a);
            REQUIRE(dist_to_true_cells(disk, p) > 0.1);
        }
    }

    ProjectionRegion empty;
    empty.center = cplx(0, 0);
    empty.half_width = 1.0;
    empty.resolution = 32;
    empty.bitmap.assign(32 * 32, 0);
    EscapeResult free = escape_path(empty, cplx(0, 0), 2.0, 0.1);
    REQUIRE(free.found);
    REQUIRE(free.line.vertices.size() == 2);  // straight shot
    REQUIRE(std::abs(free.line.vertices.back()) > 2.0);

    CompactSet A = CompactSet::annulus2d(0.5, 1.0);
    ProjectionRegion ring = project(A, e1, 64);
    EscapeResult trapped = escape_path(ring, cplx(0, 0), 3.0, 0.1);
    REQUIRE_FALSE(trapped.found);
    REQUIRE_FALSE(trapped.note.empty());
}
