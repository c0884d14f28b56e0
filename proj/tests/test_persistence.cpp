#include <doctest.h>

#include <cmath>
#include <random>

#include "diagpath/errors.hpp"
#include "diagpath/persistence.hpp"
#include "oracles.hpp"

using namespace diagpath;
using namespace diagpath::persistence;

namespace {

const Cloud kSquare = {{{0, 0, 0}}, {{1, 0, 0}}, {{1, 1, 0}}, {{0, 1, 0}}};

Cloud random_cloud(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0, 1);
    Cloud c(n);
    for (auto& p : c) p = {u(rng), u(rng), u(rng)};
    return c;
}

bool same_diagrams(const DiagramTriple& a, const DiagramTriple& b, double tol) {
    for (int d = 0; d < 3; ++d) {
        const auto pa = sorted_points(a[d]), pb = sorted_points(b[d]);
        if (pa.size() != pb.size()) return false;
        for (std::size_t i = 0; i < pa.size(); ++i)
            if (std::abs(pa[i].birth - pb[i].birth) > tol || std::abs(pa[i].lifetime - pb[i].lifetime) > tol)
                return false;
    }
    return true;
}

}  // namespace

TEST_CASE("rips filtration of small clouds") {
    SUBCASE("two points") {
        const auto cx = rips_filtration({{{0, 0, 0}}, {{0.5, 0, 0}}}, 1, 1.0);
        REQUIRE(cx.simplices.size() == 3);
        CHECK(cx.count(0) == 2);
        CHECK(cx.count(1) == 1);
        CHECK(cx.simplices.back().value == doctest::Approx(0.5));
    }
    SUBCASE("unit square") {
        const auto cx = rips_filtration(kSquare, 1, 2.0);
        CHECK(cx.count(0) == 4);
        CHECK(cx.count(1) == 6);
        CHECK(cx.count(2) == 4);
        std::size_t unit_edges = 0, diag_edges = 0;
        for (const auto& s : cx.simplices) {
            if (s.dim == 1 && s.value == 1.0) ++unit_edges;
            if (s.dim == 1 && std::abs(s.value - std::sqrt(2.0)) < 1e-15) ++diag_edges;
            if (s.dim == 2) CHECK(s.value == doctest::Approx(std::sqrt(2.0)));
        }
        CHECK(unit_edges == 4);
        CHECK(diag_edges == 2);
    }
    SUBCASE("equilateral triangle enters with its last edge") {
        const double s = 0.7;
        const auto cx = rips_filtration({{{0, 0, 0}}, {{s, 0, 0}}, {{s / 2, s * std::sqrt(3.0) / 2, 0}}}, 1, 1.0);
        REQUIRE(cx.count(2) == 1);
        CHECK(cx.simplices.back().dim == 2);
        CHECK(cx.simplices.back().value == doctest::Approx(s));
    }
}

TEST_CASE("filtration order puts faces first") {
    std::mt19937_64 rng(5);
    const auto cloud = random_cloud(rng, 9);
    const auto cx = rips_filtration(cloud, 2, 0.8);
    for (std::size_t k = 1; k < cx.simplices.size(); ++k) {
        const auto& a = cx.simplices[k - 1];
        const auto& b = cx.simplices[k];
        CHECK((a.value < b.value || (a.value == b.value && a.dim <= b.dim)));
    }
}

TEST_CASE("size guard") {
    std::mt19937_64 rng(1);
    const auto cloud = random_cloud(rng, 30);
    try {
        rips_filtration(cloud, 2, 10.0, 1000);
        FAIL("expected a size error");
    } catch (const SizeError& e) {
        CHECK(e.estimate() > 1000);
    }
}

TEST_CASE("unit square homology") {
    const auto dg = persistence_diagrams(rips_filtration(kSquare, 1, 2.0), 2.0);
    REQUIRE(dg[1].size() == 1);
    CHECK(std::abs(dg[1].points[0].birth - 1.0) < 1e-9);
    CHECK(std::abs(dg[1].points[0].lifetime - (std::sqrt(2.0) - 1.0)) < 1e-9);
    // four components, three merge at 1, one capped at T
    REQUIRE(dg[0].size() == 4);
    std::size_t capped = 0;
    for (const auto& p : dg[0].points) {
        CHECK(p.birth == 0);
        if (p.lifetime == 2.0) ++capped;
        else CHECK(p.lifetime == doctest::Approx(1.0));
    }
    CHECK(capped == 1);
    CHECK(dg[2].empty());
}

TEST_CASE("isolated points and a single point") {
    const Cloud far = {{{0, 0, 0}}, {{10, 0, 0}}, {{0, 10, 0}}};
    const auto dg = persistence_diagrams(rips_filtration(far, 1, 1.0), 1.0);
    REQUIRE(dg[0].size() == 3);
    for (const auto& p : dg[0].points) CHECK(p.death() == 1.0);

    const auto one = persistence_diagrams(rips_filtration({{{0.3, 0.2, 0.1}}}, 2, 2.0), 2.0);
    REQUIRE(one[0].size() == 1);
    CHECK(one[0].points[0].birth == 0);
    CHECK(one[0].points[0].lifetime == 2.0);
    CHECK(one[1].empty());
    CHECK(one[2].empty());
}

TEST_CASE("duplicate points merge immediately") {
    const Cloud dup = {{{0, 0, 0}}, {{0, 0, 0}}, {{1, 0, 0}}};
    const auto dg = persistence_diagrams(rips_filtration(dup, 1, 2.0), 2.0);
    CHECK(dg[0].size() == 2);  // the zero-length merge is dropped
}

TEST_CASE("octahedron has a two-cycle") {
    const Cloud oct = {{{1, 0, 0}}, {{-1, 0, 0}}, {{0, 1, 0}}, {{0, -1, 0}}, {{0, 0, 1}}, {{0, 0, -1}}};
    const auto dg = persistence_diagrams(rips_filtration(oct, 2, 3.0), 3.0);
    REQUIRE(dg[2].size() == 1);
    CHECK(dg[2].points[0].birth == doctest::Approx(std::sqrt(2.0)));
    CHECK(dg[2].points[0].death() == doctest::Approx(2.0));
}

TEST_CASE("betti curves") {
    PersistenceDiagram d;
    d.homology_dim = 1;
    d.bound = 2;
    CHECK(betti_curve(d, 0.5) == 0);
    d.add(1.0, std::sqrt(2.0) - 1.0);
    CHECK(betti_curve(d, 1.2) == 1);
    CHECK(betti_curve(d, 0.9) == 0);
    CHECK(betti_curve(d, std::sqrt(2.0)) == 0);
    CHECK(betti_curve(d, 1.0) == 0);

    PersistenceDiagram o;
    o.add(0, 1);
    o.add(0.5, 1);
    CHECK(betti_curve(o, 0.75) == 2);
    o.weight = 0.25;
    CHECK(weighted_betti(o, 0.75) == 0.5);
}

TEST_CASE("betti curves match brute-force simplicial rank") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> size(3, 8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto cloud = random_cloud(rng, size(rng));
        double maxd = 0;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            for (std::size_t j = i + 1; j < cloud.size(); ++j) maxd = std::max(maxd, oracle::edge(cloud, i, j));
        const double T = maxd + 1;
        const auto dg = persistence_diagrams(rips_filtration(cloud, 2, T), T);
        std::uniform_real_distribution<double> ueps(0.01, maxd * 1.05);
        for (int k = 0; k < 5; ++k) {
            const double eps = ueps(rng);
            const auto ref = oracle::rips_betti(cloud, eps);
            for (int d = 0; d < 3; ++d) CHECK(betti_curve(dg[d], eps) == ref[d]);
        }
    }
}

TEST_CASE("permutation and rigid-motion invariance") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        auto cloud = random_cloud(rng, 12);
        const auto base = cloud_diagrams(cloud, 2, 0.9, 0.9);
        std::shuffle(cloud.begin(), cloud.end(), rng);
        CHECK(same_diagrams(base, cloud_diagrams(cloud, 2, 0.9, 0.9), 0.0));

        // random rotation about a random axis plus a translation
        std::normal_distribution<double> g(0, 1);
        double ax = g(rng), ay = g(rng), az = g(rng);
        const double nrm = std::sqrt(ax * ax + ay * ay + az * az);
        ax /= nrm, ay /= nrm, az /= nrm;
        const double th = g(rng), c = std::cos(th), s = std::sin(th), C = 1 - c;
        const double R[3][3] = {{c + ax * ax * C, ax * ay * C - az * s, ax * az * C + ay * s},
                                {ay * ax * C + az * s, c + ay * ay * C, ay * az * C - ax * s},
                                {az * ax * C - ay * s, az * ay * C + ax * s, c + az * az * C}};
        Cloud moved = cloud;
        for (auto& p : moved) {
            Point3 q{};
            for (int i = 0; i < 3; ++i) q[i] = R[i][0] * p[0] + R[i][1] * p[1] + R[i][2] * p[2] + 3.0;
            p = q;
        }
        CHECK(same_diagrams(base, cloud_diagrams(moved, 2, 0.9, 0.9), 1e-9));
    }
}

TEST_CASE("raising the threshold keeps early finite pairs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto cloud = random_cloud(rng, 10);
        const double lo = 0.4, hi = 0.9;
        const auto a = cloud_diagrams(cloud, 2, lo, hi);
        const auto b = cloud_diagrams(cloud, 2, hi, hi);
        for (int d = 0; d < 3; ++d)
            for (const auto& p : a[d].points) {
                if (p.death() >= lo) continue;  // essential at the lower threshold
                bool found = false;
                for (const auto& q : b[d].points) found = found || (q == p);
                CHECK(found);
            }
    }
}

TEST_CASE("diagram invariants") {
    PersistenceDiagram d;
    d.bound = 1;
    d.add(0.2, 0.0);
    CHECK(d.empty());
    d.add(0.2, 0.5);
    CHECK_NOTHROW(d.validate());
    d.points.push_back({0.8, 0.5});
    CHECK_THROWS_AS(d.validate(), DataError);
}

TEST_CASE("diagram path shares one bound") {
    swarm::PointCloudSeries s;
    std::mt19937_64 rng(3);
    for (int t = 0; t < 4; ++t) {
        s.times.push_back(t);
        s.clouds.push_back(random_cloud(rng, 6 + t));
    }
    const auto path = diagram_path(s, PersistOptions{}, 7, "full");
    CHECK(path.frames.size() == 4);
    CHECK(path.sim_id == 7);
    for (const auto& fr : path.frames)
        for (const auto& d : fr) {
            CHECK(d.bound == path.bound);
            CHECK_NOTHROW(d.validate());
        }
    // enclosing radius oracle
    for (const auto& c : s.clouds) {
        double best = 1e300;
        for (std::size_t i = 0; i < c.size(); ++i) {
            double far = 0;
            for (std::size_t j = 0; j < c.size(); ++j) far = std::max(far, oracle::edge(c, i, j));
            best = std::min(best, far);
        }
        CHECK(enclosing_radius(c) == doctest::Approx(best).epsilon(1e-14));
    }
}
