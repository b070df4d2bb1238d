#include <doctest.h>

#include "ccd/dataset.hpp"
#include "ccd/errors.hpp"
#include "ccd/oracle.hpp"
#include "ccd/solver.hpp"
#include "fixtures.hpp"

using namespace ccd;

namespace {

oracle::OracleVerdictKind certify_before(const Query& q, const CCDResult& r, double separation = 0.0)
{
    oracle::CertifyOptions opts;
    opts.t_hi = oracle::to_rat(*r.toi) - oracle::to_rat(r.achieved_tol);
    opts.separation = oracle::to_rat(separation);
    return oracle::certify_no_root(oracle::RatQuery::from(q), opts).kind;
}

const std::vector<dataset::LabeledQuery>& suite()
{
    static const std::vector<dataset::LabeledQuery> queries = [] {
        auto out = dataset::gen_handcrafted();
        for (auto profile : {dataset::Profile::SimulationLike, dataset::Profile::Adversarial}) {
            auto r = dataset::gen_random(600, 5, profile);
            out.insert(out.end(), r.queries.begin(), r.queries.end());
        }
        return out;
    }();
    return queries;
}

}  // namespace

TEST_CASE("solve: examples")
{
    CHECK_FALSE(solve(fixtures::offset_vf()).collides());

    const CCDResult v = solve(fixtures::vertical_vf());
    REQUIRE(v.collides());
    CHECK(*v.toi <= 0.5);
    CHECK(*v.toi >= 0.5 - 1e-3);
    CHECK_FALSE(v.early_terminated);
    CHECK(v.codomain_width < 1e-6);
    CHECK(v.achieved_tol == v.witness.t.width());
    CHECK(v.witness.t.lo == *v.toi);
    CHECK(certify_before(fixtures::vertical_vf(), v) == oracle::OracleVerdictKind::NoRoot);

    CHECK(solve(fixtures::hourglass_vf()).collides());
    CHECK(solve(fixtures::crossing_ee()).collides());
    CHECK_FALSE(solve(fixtures::parallel_ee()).collides());
}

TEST_CASE("solve: minimum separation")
{
    SolverConfig cfg;
    cfg.separation = 0.1;
    const CCDResult r = solve(fixtures::vertical_vf(), cfg);
    REQUIRE(r.collides());
    CHECK(*r.toi <= 0.45);
    CHECK(*r.toi >= 0.45 - r.achieved_tol - 1e-6);
    CHECK(certify_before(fixtures::vertical_vf(), r, 0.1) == oracle::OracleVerdictKind::NoRoot);

    // A vertex passing 5e-4 beside the triangle is reported once d exceeds the gap.
    const Query pass = Query::vertex_face({{{-5e-4, 0.3, 1}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}}},
                                          {{{-5e-4, 0.3, -1}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}}});
    CHECK_FALSE(solve(pass).collides());
    cfg.separation = 1e-3;
    CHECK(solve(pass, cfg).collides());
    cfg.separation = 1e-4;
    CHECK_FALSE(solve(pass, cfg).collides());
}

TEST_CASE("solve: t_max caps the searched interval")
{
    SolverConfig cfg;
    cfg.t_max = 0.4;
    CHECK_FALSE(solve(fixtures::vertical_vf(), cfg).collides());
    cfg.t_max = 0.75;
    const CCDResult r = solve(fixtures::vertical_vf(), cfg);
    REQUIRE(r.collides());
    CHECK(*r.toi <= 0.5);
    CHECK(r.witness.t.hi <= 0.75);
}

TEST_CASE("solve: configuration validation")
{
    SolverConfig cfg;
    cfg.delta = 0;
    CHECK_THROWS_AS(solve(fixtures::vertical_vf(), cfg), UsageError);
    cfg = {};
    cfg.max_checks = 0;
    CHECK_THROWS_AS(solve(fixtures::vertical_vf(), cfg), UsageError);
    cfg = {};
    cfg.t_max = 1.5;
    CHECK_THROWS_AS(solve(fixtures::vertical_vf(), cfg), UsageError);
    cfg = {};
    cfg.separation = -1;
    CHECK_THROWS_AS(solve(fixtures::vertical_vf(), cfg), UsageError);
    cfg = {};
    cfg.separation = 0.1;
    cfg.filters = compute_filters(QueryKind::VertexFace, {1, 1, 1}, 0.0);
    CHECK_THROWS_AS(solve(fixtures::vertical_vf(), cfg), UsageError);
}

TEST_CASE("split examples")
{
    const DomainBox unit = DomainBox::unit();
    SplitResult s = split(unit, kappas(fixtures::vertical_vf()), QueryKind::VertexFace);
    CHECK(s.dimension == 0);
    CHECK(s.first.t == Interval{0, 0.5});
    CHECK(s.second.t == Interval{0.5, 1});
    CHECK(s.first.level == 1);
    CHECK(s.second.level == 1);
    CHECK(s.first_alive);
    CHECK(s.second_alive);

    CHECK(split(unit, {3, 3, 3}, QueryKind::EdgeEdge).dimension == 0);
    CHECK(split(unit, {1, 3, 3}, QueryKind::EdgeEdge).dimension == 1);
    CHECK(split(unit, {1, 2, 3}, QueryKind::EdgeEdge).dimension == 2);

    const DomainBox corner{{0, 1}, {0.75, 1}, {0.75, 1}, 3};
    const SplitResult dead = split(corner, {3, 3, 3}, QueryKind::VertexFace);
    CHECK_FALSE(dead.first_alive);
    CHECK_FALSE(dead.second_alive);
    const SplitResult kept = split(corner, {3, 3, 3}, QueryKind::EdgeEdge);
    CHECK(kept.first_alive);
    CHECK(kept.second_alive);

    // Zero stretch never splits that dimension.
    CHECK(split(unit, {0, 1, 0}, QueryKind::EdgeEdge).dimension == 1);
    CHECK_THROWS_AS(split(unit, {0, 0, 0}, QueryKind::EdgeEdge), DegenerateBoxError);
}

TEST_CASE("queue_order examples")
{
    const DomainBox a{{0.5, 1}, {0, 1}, {0, 1}, 1};
    const DomainBox b{{0, 0.5}, {0, 1}, {0, 1}, 2};
    CHECK(queue_order(a, b));
    CHECK_FALSE(queue_order(b, a));
    const DomainBox c{{0, 0.5}, {0, 1}, {0, 1}, 1};
    CHECK(queue_order(c, a));
    CHECK_FALSE(queue_order(c, c));
}

TEST_CASE("property: conservative on constructed contacts for any delta, m_I and separation")
{
    int checked = 0;
    for (const auto& lq : suite()) {
        if (!lq.witness) {
            continue;
        }
        const double t_star = lq.witness->t.get_d();
        for (double delta : {1e-2, 1e-6, 1e-8}) {
            for (std::int64_t m : {std::int64_t{1}, std::int64_t{100}, std::int64_t{1'000'000}}) {
                for (double d : {0.0, 1e-30, 1e-3}) {
                    if (d > 1e-6 && m > 10'000) {
                        // With a real separation every level holds a whole slab of
                        // colliding boxes; the full budget adds time, not coverage.
                        m = 10'000;
                    }
                    SolverConfig cfg;
                    cfg.delta = delta;
                    cfg.max_checks = m;
                    cfg.separation = d;
                    const CCDResult r = solve(lq.query, cfg);
                    INFO(lq.label, " delta=", delta, " m=", m, " d=", d);
                    REQUIRE(r.collides());
                    REQUIRE(*r.toi <= t_star);
                    REQUIRE(r.checks <= m);
                    if (!r.early_terminated) {
                        // Termination either met the width test or lies inside the filter cube.
                        const FilterEps eps = compute_filters(lq.query.kind(), compute_gamma(lq.query), d);
                        const bool small = r.codomain_width < delta;
                        const bool inside = box_inclusion(lq.query, r.witness).width() <= 2 * eps.max_eps();
                        REQUIRE((small || inside));
                    }
                }
            }
        }
        ++checked;
    }
    CHECK(checked > 600);
}

TEST_CASE("property: returned toi is not preceded by a root (oracle)")
{
    int n = 0;
    for (const auto& lq : suite()) {
        if (!lq.witness || n >= 150) {
            continue;
        }
        const CCDResult r = solve(lq.query);
        REQUIRE(r.collides());
        INFO(lq.label);
        CHECK(certify_before(lq.query, r) == oracle::OracleVerdictKind::NoRoot);
        ++n;
    }
}

TEST_CASE("property: verdicts at d = 1e-30 equal verdicts at d = 0")
{
    SolverConfig tiny;
    tiny.separation = 1e-30;
    for (const auto& lq : suite()) {
        INFO(lq.label);
        CHECK(solve(lq.query).collides() == solve(lq.query, tiny).collides());
    }
}

TEST_CASE("property: lowering m_I never turns a collision into a miss")
{
    for (const auto& lq : suite()) {
        const bool full = solve(lq.query).collides();
        for (std::int64_t m : {std::int64_t{1}, std::int64_t{10}, std::int64_t{100}, std::int64_t{10'000}}) {
            SolverConfig cfg;
            cfg.max_checks = m;
            const CCDResult r = solve(lq.query, cfg);
            if (full) {
                REQUIRE(r.collides());
            }
            REQUIRE(r.checks <= m);
        }
    }
}

TEST_CASE("property: deterministic")
{
    for (const auto& lq : suite()) {
        const CCDResult a = solve(lq.query);
        const CCDResult b = solve(lq.query);
        CHECK(a.toi == b.toi);
        CHECK(a.witness == b.witness);
        CHECK(a.checks == b.checks);
        CHECK(a.codomain_width == b.codomain_width);
    }
}
