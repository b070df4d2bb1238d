#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ccd/errors.hpp"
#include "ccd/oracle.hpp"
#include "ccd/scene.hpp"
#include "random_queries.hpp"
#include "scene_fixtures.hpp"

using namespace ccd;
using namespace ccd::scene;

namespace {

TriMeshPair two_triangles(double gap, double drop)
{
    // Upper triangle sits `gap` above the lower one and falls by `drop`.
    std::vector<Vec3> x0{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.1, 0.1, gap}, {1.1, 0.1, gap}, {0.1, 1.1, gap}};
    std::vector<Vec3> x1 = x0;
    for (int i = 3; i < 6; ++i) {
        x1[static_cast<std::size_t>(i)].z -= drop;
    }
    return TriMeshPair::from_triangles(x0, x1, {{0, 1, 2}, {3, 4, 5}});
}

TriMeshPair random_mesh(std::mt19937_64& rng, int n_tris, double spread, double motion)
{
    std::uniform_real_distribution<double> pos(0.0, spread), mv(-motion, motion), local(-0.5, 0.5);
    std::vector<Vec3> x0, x1;
    std::vector<Triangle> tris;
    for (int t = 0; t < n_tris; ++t) {
        const Vec3 c{pos(rng), pos(rng), pos(rng)};
        const Vec3 m{mv(rng), mv(rng), mv(rng)};
        for (int k = 0; k < 3; ++k) {
            const Vec3 p = c + Vec3{local(rng), local(rng), local(rng)};
            x0.push_back(p);
            x1.push_back(p + m + Vec3{0.1 * local(rng), 0.1 * local(rng), 0.1 * local(rng)});
        }
        tris.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    }
    return TriMeshPair::from_triangles(x0, x1, tris);
}

bool contains(const std::vector<ContactCandidate>& set, const ContactCandidate& c)
{
    return std::any_of(set.begin(), set.end(),
                       [&](const ContactCandidate& x) { return x.kind == c.kind && x.a == c.a && x.b == c.b; });
}

}  // namespace

TEST_CASE("mesh construction and validation")
{
    const TriMeshPair m = two_triangles(1, 0);
    CHECK(m.edges.size() == 6);
    CHECK(TriMeshPair::edges_of(std::vector<Triangle>{{0, 1, 2}, {2, 1, 3}}).size() == 5);
    CHECK(m.gamma() == Gamma{1.1, 1.1, 1.0});

    TriMeshPair bad = m;
    bad.x1.pop_back();
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = m;
    bad.triangles.push_back({0, 1, 9});
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = m;
    bad.triangles.push_back({0, 1, 1});
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = m;
    bad.x0[0].x = NAN;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("distances")
{
    const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
    CHECK(point_triangle_distance({0, 0, 10}, a, b, c) == 10);
    CHECK(point_triangle_distance({0.2, 0.2, 0}, a, b, c) == 0);
    CHECK(point_triangle_distance({2, 0, 0}, a, b, c) == 1);
    CHECK(point_triangle_distance({1, 1, 0}, a, b, c) == doctest::Approx(std::sqrt(0.5)));
    // Zero-area triangle: distance to its segment.
    CHECK(point_triangle_distance({0.5, 1, 0}, a, b, {2, 0, 0}) == 1);
    CHECK(point_triangle_distance({3, 4, 0}, a, a, a) == 5);

    CHECK(segment_segment_distance({-1, 0, 0}, {1, 0, 0}, {0, -1, 1}, {0, 1, 1}) == 1);
    CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 0, 0}, {1, 0, 0}) == 0);
    CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {1, 2, 0}) == 2);
    CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {3, 0, 0}, {5, 0, 0}) == 2);
    CHECK(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0, 1, 0}) == 1);

    const TriMeshPair m = TriMeshPair::from_triangles({{0, 0, 10}, a, b, c}, {{0, 0, 10}, a, b, c}, {{1, 2, 3}});
    const auto cands = all_pairs(m, 100);
    REQUIRE(cands.size() == 1);
    const double lb = primitive_distance_lb(cands[0]);
    CHECK(lb < 10 / std::sqrt(3.0));
    CHECK(lb == std::nextafter(10 / std::sqrt(3.0), 0.0));
    CHECK(lb == doctest::Approx(5.7735).epsilon(1e-5));
}

TEST_CASE("property: distance lower bound never exceeds the exact L-infinity distance")
{
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int n = 0; n < 2000; ++n) {
        const Query q = testing::random_query(rng, n % 2 ? QueryKind::EdgeEdge : QueryKind::VertexFace, 2.0);
        const ContactCandidate c{q.kind(), 0, 1, {0, 1, 2, 3}, q};
        const double lb = primitive_distance_lb(c);
        CHECK(lb >= 0);
        // Sample the parameter domain at t = 0.
        for (int s = 0; s < 30; ++s) {
            double u = uni(rng), v = uni(rng);
            if (q.kind() == QueryKind::VertexFace && u + v > 1) {
                u = 1 - u;
                v = 1 - v;
            }
            REQUIRE(norm_inf(eval_F(q, 0.0, u, v)) >= lb);
        }
    }
}

TEST_CASE("broad phase examples")
{
    CHECK(broad_phase(two_triangles(100, 1), 0.1).empty());
    const auto falling = broad_phase(two_triangles(1, 2), 0);
    CHECK(falling.size() == all_pairs(two_triangles(1, 2), 0).size());
    CHECK_FALSE(falling.empty());

    fixtures::ApproachScene s;
    s.mesh.x1[0] = s.target;
    const auto c = broad_phase(s.mesh, 0);
    REQUIRE(c.size() == 1);
    CHECK(c[0].kind == QueryKind::VertexFace);
    CHECK(c[0].vertices == std::array<int, 4>{0, 1, 2, 3});
    CHECK(c[0].query == Query::vertex_face({{s.mesh.x0[0], {0, 0, 0}, {1, 0, 0}, {0, 1, 0}}},
                                           {{s.target, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}}}));
    CHECK_THROWS_AS(broad_phase(s.mesh, -1), UsageError);
}

TEST_CASE("property: broad phase matches all pairs and grows with inflation")
{
    std::mt19937_64 rng(73);
    for (int n = 0; n < 30; ++n) {
        const TriMeshPair m = random_mesh(rng, 12, 4.0, 0.5);
        std::vector<ContactCandidate> previous;
        for (double r : {0.0, 0.05, 0.1, 0.5}) {
            const auto grid = broad_phase(m, r);
            CHECK(grid == all_pairs(m, r));
            for (const auto& c : previous) {
                CHECK(contains(grid, c));
            }
            previous = grid;
        }
    }
}

TEST_CASE("property: broad phase keeps every pair the solver reports")
{
    std::mt19937_64 rng(79);
    const double d = 1e-3;
    const double delta = 1e-6;
    for (int n = 0; n < 6; ++n) {
        TriMeshPair m = random_mesh(rng, 8, 2.0, 0.6);
        const auto kept = broad_phase(m, d + delta);
        // Exhaustive: every non-incident pair, regardless of boxes.
        TriMeshPair everything = m;
        for (const auto& c : all_pairs(everything, 1e6)) {
            SolverConfig cfg;
            cfg.separation = d;
            cfg.delta = delta;
            cfg.max_checks = 10'000;
            cfg.filters = compute_filters(c.kind, m.gamma(), d);
            if (solve(c.query, cfg).collides()) {
                CHECK(contains(kept, c));
            }
        }
    }
}

TEST_CASE("active set examples")
{
    CHECK(construct_active_set(two_triangles(100, 1)).empty());

    fixtures::ApproachScene s;
    s.mesh.x1[0] = s.target;
    const auto hit = construct_active_set(s.mesh);
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].toi <= 0.5);
    CHECK(hit[0].toi >= 0.5 - 1e-5);
    CHECK(hit[0].witness.u.contains(0.3));

    // Sliding past at L-infinity distance 5e-4 above the triangle plane.
    fixtures::ApproachScene glide(5e-4);
    glide.mesh.x1[0] = {0.6, 0.1, 5e-4};
    ActiveSetConfig cfg;
    cfg.separation = 1e-3;
    cfg.max_checks = 100'000;
    CHECK(construct_active_set(glide.mesh, cfg).size() == 1);
    cfg.separation = 0;
    CHECK(construct_active_set(glide.mesh, cfg).empty());
}

TEST_CASE("line search examples and errors")
{
    const TriMeshPair far = two_triangles(100, 0);
    const std::vector<Vec3> small(far.x0.size(), Vec3{0.1, 0, 0});
    CHECK(line_search_step(far, small, 0.5, 1e-6, 1'000'000) == 1.0);
    // Energy halving alone.
    const double halved = line_search_step(far, small, 0.5, 1e-6, 1'000'000, [](double a) { return a <= 0.25; });
    CHECK(halved == 0.25);
    const double floor_hit = line_search_step(far, small, 0.5, 1e-6, 1'000'000, [](double) { return false; });
    CHECK(floor_hit <= 1e-10);

    fixtures::ApproachScene s;
    const LineSearchResult r = line_search(s.mesh, s.direction(), 0.5, 1e-6, 100'000);
    CHECK(r.alpha > 0);
    CHECK(r.alpha <= 0.5);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].separation == doctest::Approx(0.5 / std::sqrt(3.0)));

    LineSearchOptions capped;
    capped.separation_cap = 1e-3;
    const LineSearchResult rc = line_search(s.mesh, s.direction(), 0.5, 1e-6, 100'000, {}, capped);
    CHECK(rc.pairs[0].separation == 1e-3);
    CHECK(rc.alpha > r.alpha);

    CHECK_THROWS_AS(line_search_step(s.mesh, s.direction(), 0.0, 1e-6, 100), UsageError);
    CHECK_THROWS_AS(line_search_step(s.mesh, s.direction(), 1.0, 1e-6, 100), UsageError);
    CHECK_THROWS_AS(line_search_step(s.mesh, std::vector<Vec3>(2), 0.5, 1e-6, 100), UsageError);
    std::vector<Vec3> nan_dx = s.direction();
    nan_dx[1].x = NAN;
    CHECK_THROWS_AS(line_search_step(s.mesh, nan_dx, 0.5, 1e-6, 100), UsageError);

    // Already touching: nothing can be validated.
    fixtures::ApproachScene touching(0.0);
    CHECK_THROWS_AS(line_search_step(touching.mesh, touching.direction(), 0.5, 1e-6, 100), InfeasibleStepError);
    // Closer than delta + rho.
    fixtures::ApproachScene close(1e-9);
    CHECK_THROWS_AS(line_search_step(close.mesh, close.direction(), 0.5, 1e-6, 100), InfeasibleStepError);
}

TEST_CASE("iterated approach forms a valid sequence")
{
    fixtures::ApproachScene s;
    const double p = 0.9;
    const double delta = 1e-12;
    double cumulative = 0.0;
    double previous_z = s.mesh.x0[0].z;
    for (int step = 0; step < 20; ++step) {
        INFO("step " << step);
        const LineSearchResult r = line_search(s.mesh, s.direction(), p, delta, 100'000);
        REQUIRE(r.alpha > 0);
        for (const ValidatedPair& vp : r.pairs) {
            oracle::CertifyOptions opts;
            opts.separation = oracle::to_rat(vp.separation);
            opts.t_hi = oracle::to_rat(r.alpha);
            const auto exact = oracle::RatQuery::from(vp.candidate.query);
            CHECK(oracle::certify_no_root(exact, opts).kind == oracle::OracleVerdictKind::NoRoot);
        }
        s.advance(r.alpha);
        const double z = s.mesh.x0[0].z;
        REQUIRE(z < previous_z);
        REQUIRE(z > 0);
        const double t = (1.0 - z) / 2.0;
        REQUIRE(t > cumulative);
        cumulative = t;
        previous_z = z;
    }
    CHECK(cumulative < 0.5);
    CHECK(cumulative > 0.49);
}

TEST_CASE("OBJ reader")
{
    std::istringstream in(
        "# a quad and a triangle\n"
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "vn 0 0 1\n"
        "f 1/1/1 2/2/1 3/3/1 4/4/1\n"
        "f -1 -2 -3\n");
    const ObjMesh m = parse_obj(in);
    CHECK(m.vertices.size() == 4);
    REQUIRE(m.triangles.size() == 3);
    CHECK(m.triangles[0] == Triangle{0, 1, 2});
    CHECK(m.triangles[1] == Triangle{0, 2, 3});
    CHECK(m.triangles[2] == Triangle{3, 2, 1});

    auto row_of = [](const std::string& text) {
        std::istringstream s(text);
        try {
            parse_obj(s);
        } catch (const ParseError& e) {
            return static_cast<int>(e.row());
        }
        return -1;
    };
    CHECK(row_of("v 0 0\n") == 0);
    CHECK(row_of("v 0 0 0\nf 1 2\n") == 1);
    CHECK(row_of("v 0 0 0\nv 0 0 0\nv 0 0 0\nf 1 2 4\n") == 3);
    CHECK(row_of("v 0 0 0\nv 0 0 0\nv 0 0 0\nf 1 x 3\n") == 3);
    CHECK_THROWS_AS(load_obj("/nonexistent/mesh.obj"), IoError);
}
