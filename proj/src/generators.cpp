// Handcrafted and random labeled query generators.
//
// Collisions are planted: pick the moving face (or edge pair), an exact
// contact parameter (t*, u*, v*) on a dyadic grid, and solve for the linear
// trajectory of the remaining primitive so that F(t*, u*, v*) = 0 holds in
// exact arithmetic. Everything stays on dyadic grids coarse enough that every
// coordinate is a binary64 value, so the rounded query keeps the root.

#include <cmath>
#include <random>
#include <stdexcept>
#include <optional>
#include <tuple>

#include "ccd/dataset.hpp"
#include "ccd/errors.hpp"

namespace ccd::dataset {

using oracle::Rat;
using oracle::RatQuery;
using oracle::RatVec3;
using oracle::RootWitness;

namespace {

Rat dyadic(std::int64_t k, int exp)
{
    Rat r(static_cast<long>(k));
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(exp));
    return r;
}

RatVec3 operator+(const RatVec3& a, const RatVec3& b)
{
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}

RatVec3 operator-(const RatVec3& a, const RatVec3& b)
{
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}

RatVec3 operator*(const Rat& s, const RatVec3& a)
{
    return {s * a.x, s * a.y, s * a.z};
}

RatVec3 lerp(const RatVec3& a, const RatVec3& b, const Rat& t)
{
    return a + t * (b - a);
}

RatVec3 rv(double x, double y, double z)
{
    return oracle::to_rat(Vec3{x, y, z});
}

/// Portable draws on top of mt19937_64; the standard distributions are
/// implementation-defined, which would make datasets differ between toolchains.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t below(std::uint64_t m) { return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng_()) * m) >> 64); }

    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool coin(double p) { return static_cast<double>(rng_() >> 11) * 0x1p-53 < p; }

    /// k * 2^-exp with |k * 2^-exp| <= bound.
    Rat grid(double bound, int exp)
    {
        const auto m = static_cast<std::int64_t>(std::ldexp(bound, exp));
        return dyadic(between(-m, m), exp);
    }

    RatVec3 grid3(double bound, int exp) { return {grid(bound, exp), grid(bound, exp), grid(bound, exp)}; }

    /// Uniform on {0, 2^-exp, ..., 1}.
    Rat unit(int exp) { return dyadic(between(0, std::int64_t{1} << exp), exp); }

private:
    std::mt19937_64 rng_;
};

struct ProfileParams {
    double coord_bound;    // start positions of the anchor primitive
    int coord_exp;         // coordinate grid 2^-coord_exp
    double edge_len;       // edge vectors drawn from [-edge_len, edge_len]^3
    double translation;    // common displacement over the step
    double jitter;         // per-vertex displacement on top of it
    double velocity;       // relative approach displacement
    int param_exp;         // contact parameter grid
    double boundary_prob;  // chance of a contact on a domain face
    double free_end_prob;  // chance of unrelated end positions (tumbling)
    int gap_exp_min;       // near-miss offsets between 2^-gap_exp_max and 2^-gap_exp_min
    int gap_exp_max;
};

ProfileParams params(Profile p)
{
    if (p == Profile::SimulationLike) {
        return {1.0, 16, 1.0, 0.25, 0x1p-6, 0.5, 10, 0.1, 0.0, 2, 14};
    }
    return {100.0, 8, 100.0, 100.0, 8.0, 200.0, 11, 0.5, 0.5, -4, 20};
}

bool representable(const Rat& x)
{
    return oracle::to_rat(oracle::to_double(x)) == x;
}

bool representable(const RatQuery& q)
{
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 3; ++k) {
            if (!representable(q.start[i][k]) || !representable(q.end[i][k])) {
                return false;
            }
        }
    }
    return true;
}

/// Start and end positions of one moving point.
struct Track {
    RatVec3 a, b;
};

std::array<Track, 3> moving_points(Draw& g, const ProfileParams& pp, int count, bool face)
{
    std::array<Track, 3> out;
    const RatVec3 base = g.grid3(pp.coord_bound, pp.coord_exp);
    const RatVec3 shift = g.grid3(pp.translation, pp.coord_exp);
    const bool free_end = g.coin(pp.free_end_prob);
    for (int i = 0; i < count; ++i) {
        out[i].a = i == 0 ? base : base + g.grid3(pp.edge_len, pp.coord_exp);
        if (face && i == 2 && g.coin(pp.boundary_prob * 0.2)) {
            // Sliver: third vertex almost on the first edge.
            out[i].a = lerp(out[0].a, out[1].a, g.unit(4)) + g.grid3(std::ldexp(1.0, -6), pp.coord_exp);
        }
        out[i].b = free_end ? g.grid3(pp.coord_bound, pp.coord_exp)
                            : out[i].a + shift + g.grid3(pp.jitter, pp.coord_exp);
    }
    return out;
}

Rat contact_time(Draw& g, const ProfileParams& pp)
{
    if (g.coin(pp.boundary_prob * 0.3)) {
        return g.coin(0.5) ? Rat(0) : Rat(1);
    }
    return g.unit(pp.param_exp);
}

/// (u, v) inside the triangle, often on an edge or at a vertex.
std::pair<Rat, Rat> face_params(Draw& g, const ProfileParams& pp)
{
    Rat u = g.unit(pp.param_exp);
    Rat v = g.unit(pp.param_exp);
    if (u + v > 1) {
        u = 1 - u;
        v = 1 - v;
    }
    if (g.coin(pp.boundary_prob)) {
        switch (g.below(5)) {
        case 0:
            u = 0;
            break;
        case 1:
            v = 0;
            break;
        case 2:
            v = 1 - u;
            break;
        case 3:
            u = 0;
            v = 0;
            break;
        default:
            u = 1;
            v = 0;
            break;
        }
    }
    return {u, v};
}

std::pair<Rat, Rat> edge_params(Draw& g, const ProfileParams& pp)
{
    Rat u = g.unit(pp.param_exp);
    Rat v = g.unit(pp.param_exp);
    if (g.coin(pp.boundary_prob)) {
        if (g.coin(0.5)) {
            u = g.coin(0.5) ? 1 : 0;
        } else {
            v = g.coin(0.5) ? 1 : 0;
        }
    }
    return {u, v};
}

/// Moves (u, v) just outside the primitive's parameter domain by `gap`.
void push_outside(Draw& g, QueryKind kind, const Rat& gap, Rat& u, Rat& v)
{
    const auto side = g.below(kind == QueryKind::VertexFace ? 3 : 4);
    if (kind == QueryKind::VertexFace) {
        if (side == 0) {
            u = -gap;
        } else if (side == 1) {
            v = -gap;
        } else {
            v = 1 + gap - u;
        }
    } else {
        Rat& x = side < 2 ? u : v;
        x = side % 2 == 0 ? Rat(-gap) : Rat(1 + gap);
    }
}

/// A query with a contact at (t*, u*, v*). Retries until every coordinate is
/// a binary64 value. With `outside_gap`, the same construction is aimed at a
/// parameter point just outside the domain, which gives a near miss.
std::pair<RatQuery, RootWitness> planted(Draw& g, const ProfileParams& pp, QueryKind kind,
                                         const std::optional<Rat>& outside_gap = std::nullopt)
{
    while (true) {
        RatQuery q;
        q.kind = kind;
        RootWitness w;
        w.t = contact_time(g, pp);
        const RatVec3 vel = g.grid3(pp.velocity, pp.coord_exp);
        if (kind == QueryKind::VertexFace) {
            const auto tri = moving_points(g, pp, 3, true);
            std::tie(w.u, w.v) = face_params(g, pp);
            if (outside_gap) {
                push_outside(g, kind, *outside_gap, w.u, w.v);
            }
            const RatVec3 v1 = lerp(tri[0].a, tri[0].b, w.t);
            const RatVec3 v2 = lerp(tri[1].a, tri[1].b, w.t);
            const RatVec3 v3 = lerp(tri[2].a, tri[2].b, w.t);
            const RatVec3 target = v1 + w.u * (v2 - v1) + w.v * (v3 - v1);
            q.start[0] = target - w.t * vel;
            q.end[0] = target + (1 - w.t) * vel;
            for (int i = 0; i < 3; ++i) {
                q.start[i + 1] = tri[i].a;
                q.end[i + 1] = tri[i].b;
            }
        } else {
            const auto e1 = moving_points(g, pp, 2, false);
            const auto e2 = moving_points(g, pp, 2, false);
            std::tie(w.u, w.v) = edge_params(g, pp);
            if (outside_gap) {
                push_outside(g, kind, *outside_gap, w.u, w.v);
            }
            const RatVec3 a = lerp(lerp(e1[0].a, e1[0].b, w.t), lerp(e1[1].a, e1[1].b, w.t), w.u);
            const RatVec3 b = lerp(lerp(e2[0].a, e2[0].b, w.t), lerp(e2[1].a, e2[1].b, w.t), w.v);
            // Translate the second edge by s(t) with s(t*) = a - b.
            const RatVec3 s0 = (a - b) - w.t * vel;
            const RatVec3 s1 = (a - b) + (1 - w.t) * vel;
            for (int i = 0; i < 2; ++i) {
                q.start[i] = e1[i].a;
                q.end[i] = e1[i].b;
                q.start[i + 2] = e2[i].a + s0;
                q.end[i + 2] = e2[i].b + s1;
            }
        }
        if (representable(q)) {
            if (!outside_gap && !oracle::verify_root(q, w)) {
                throw std::logic_error("planted root does not verify");
            }
            return {q, w};
        }
    }
}

/// A configuration aimed just outside the primitive, missing it by a
/// parameter-space gap of 2^-gap_exp_max .. 2^-gap_exp_min.
RatQuery near_miss(Draw& g, const ProfileParams& pp, QueryKind kind)
{
    const auto e = static_cast<int>(g.between(pp.gap_exp_min, pp.gap_exp_max));
    const Rat gap = dyadic(g.between(8, 16), e + 4);
    return planted(g, pp, kind, gap).first;
}

oracle::OracleVerdict certify(const RatQuery& q, std::int64_t max_boxes, const Rat& margin)
{
    oracle::CertifyOptions opts;
    opts.separation = margin;
    opts.max_boxes = max_boxes;
    return oracle::certify_no_root(q, opts);
}

// ---------------------------------------------------------------------------
// Handcrafted cases

RatQuery rat_query(QueryKind kind, const std::array<RatVec3, 4>& s, const std::array<RatVec3, 4>& e)
{
    RatQuery q;
    q.kind = kind;
    q.start = s;
    q.end = e;
    return q;
}

LabeledQuery with_root(std::string label, const RatQuery& q, const RootWitness& w)
{
    if (!oracle::verify_root(q, w)) {
        throw std::logic_error("handcrafted witness does not verify: " + label);
    }
    LabeledQuery lq = LabeledQuery::make(q, true, Provenance::Constructed);
    lq.witness = w;
    lq.label = std::move(label);
    return lq;
}

LabeledQuery without_root(std::string label, const RatQuery& q)
{
    const auto verdict = certify(q, 4'000'000, 0);
    if (verdict.kind != oracle::OracleVerdictKind::NoRoot) {
        throw std::logic_error("handcrafted miss not certified: " + label);
    }
    LabeledQuery lq = LabeledQuery::make(q, false, Provenance::OracleCertified);
    lq.label = std::move(label);
    return lq;
}

Rat dec(const char* text)
{
    return oracle::to_rat(std::stod(text));
}

void add_near_misses(std::vector<LabeledQuery>& out)
{
    for (const char* gap : {"1e-8", "1e-12", "1e-16"}) {
        const Rat g = dec(gap);
        // Vertex falling just beside the edge u = 0 of the unit triangle.
        const RatVec3 tri0 = rv(0, 0, 0), tri1 = rv(1, 0, 0), tri2 = rv(0, 1, 0);
        const RatVec3 top{-g, dec("0.3"), 1}, bottom{-g, dec("0.3"), -1};
        out.push_back(without_root(std::string("near-miss/vf-") + gap,
                                   rat_query(QueryKind::VertexFace, {top, tri0, tri1, tri2},
                                             {bottom, tri0, tri1, tri2})));
        // Edge sweeping down past the end of a fixed edge.
        const RatVec3 a0 = rv(-1, 0, 0), a1 = rv(1, 0, 0);
        out.push_back(without_root(
            std::string("near-miss/ee-") + gap,
            rat_query(QueryKind::EdgeEdge, {a0, a1, RatVec3{1 + g, -1, 1}, RatVec3{1 + g, 1, 1}},
                      {a0, a1, RatVec3{1 + g, -1, -1}, RatVec3{1 + g, 1, -1}})));
    }
}

/// A planted contact whose coplanarity cubic has three distinct roots in [0, 1].
LabeledQuery three_root_query()
{
    Draw g(0x3c0b1c);
    const ProfileParams pp = params(Profile::Adversarial);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        auto [q, w] = planted(g, pp, QueryKind::VertexFace);
        const auto c = oracle::rational_coplanarity_cubic(q);
        const auto iso = oracle::isolate_cubic_roots(c[0], c[1], c[2], c[3]);
        if (!iso.infinitely_many && iso.intervals.size() == 3) {
            return with_root("multi-root/vf-three-coplanarity-roots", q, w);
        }
    }
    throw std::logic_error("no three-root configuration found");
}

}  // namespace

std::vector<LabeledQuery> gen_handcrafted()
{
    std::vector<LabeledQuery> out;
    const QueryKind VF = QueryKind::VertexFace;
    const QueryKind EE = QueryKind::EdgeEdge;
    const RatVec3 o = rv(0, 0, 0), ex = rv(1, 0, 0), ey = rv(0, 1, 0);

    {
        // Point fixed inside a triangle that turns over while it descends.
        const Rat a = dec("0.1");
        const RatQuery q = rat_query(VF, {RatVec3{a, a, a}, rv(0, 0, 1), rv(1, 0, 1), rv(0, 1, 1)},
                                     {RatVec3{a, a, a}, o, ey, ex});
        out.push_back(with_root("degenerate/hourglass", q, {1 - a, a, a}));
    }
    {
        const RatQuery q = rat_query(VF, {rv(1, 1, 0), rv(0, 0, 5), rv(2, 0, 2), rv(0, 1, 0)},
                                     {rv(1, 1, 0), rv(0, 0, -1), rv(0, 0, -2), rv(0, 7, 0)});
        out.push_back(without_root("degenerate/inflection", q));
    }
    {
        // Everything stays in the plane z = 1; the triangle slides onto the point.
        const Rat y0 = dec("0.57"), y1 = dec("0.28"), y0b = dec("1.57"), y1b = dec("1.28"), py = dec("0.5");
        const RatQuery q = rat_query(VF, {RatVec3{1, py, 1}, RatVec3{0, y0, 1}, RatVec3{1, y0, 1}, RatVec3{1, y0b, 1}},
                                     {RatVec3{1, py, 1}, RatVec3{0, y1, 1}, RatVec3{1, y1, 1}, RatVec3{1, y1b, 1}});
        // At t = 1 the point lies on the edge v2 v3.
        const Rat v = (py - y1) / (y1b - y1);
        out.push_back(with_root("coplanar/vf-sliding-onto-point", q, {1, 1 - v, v}));
    }
    {
        const RatQuery q = rat_query(VF, {rv(2, 2, 0), o, ex, ey}, {rv(2, -1, 0), o, ex, ey});
        out.push_back(without_root("coplanar/vf-sliding-past", q));
    }
    {
        const RatQuery q = rat_query(EE, {rv(-1, 0, 0), rv(1, 0, 0), rv(0, 1, 0), rv(0, 2, 0)},
                                     {rv(-1, 0, 0), rv(1, 0, 0), rv(0, -2, 0), rv(0, -1, 0)});
        out.push_back(with_root("coplanar/ee-crossing", q, {Rat(1, 2), Rat(1, 2), Rat(1, 2)}));
    }
    {
        const RatQuery q = rat_query(EE, {o, ex, rv(2, 0, 0), rv(3, 0, 0)}, {o, ex, rv(0.5, 0, 0), rv(1.5, 0, 0)});
        out.push_back(with_root("coplanar/ee-collinear-overlap", q, {1, 1, Rat(1, 2)}));
    }
    {
        const RatQuery q = rat_query(EE, {o, ex, rv(0, 1, 0), rv(1, 1, 0)}, {o, ex, rv(0, 2, 0), rv(1, 2, 0)});
        out.push_back(without_root("coplanar/ee-parallel-apart", q));
    }
    {
        // Triangle collapsed to a point, hit by a falling vertex.
        const RatQuery q = rat_query(VF, {rv(0, 0, 1), o, o, o}, {rv(0, 0, -1), o, o, o});
        out.push_back(with_root("point-point/vf", q, {Rat(1, 2), 0, 0}));
    }
    {
        const RatQuery q = rat_query(EE, {rv(-1, 0, 0), rv(-1, 0, 0), o, o}, {rv(1, 0, 0), rv(1, 0, 0), o, o});
        out.push_back(with_root("point-point/ee", q, {Rat(1, 2), 0, 0}));
    }
    {
        const RatQuery q = rat_query(EE, {rv(-1, 1, 0), rv(-1, 1, 0), o, o}, {rv(1, 1, 0), rv(1, 1, 0), o, o});
        out.push_back(without_root("point-point/ee-miss", q));
    }
    {
        const Rat a = dec("0.3");
        const RatQuery q = rat_query(VF, {RatVec3{a, a, 1}, o, ex, ey}, {RatVec3{a, a, -1}, o, ex, ey});
        out.push_back(with_root("planted/vf-vertical", q, {Rat(1, 2), a, a}));
    }
    {
        const RatQuery q = rat_query(EE, {rv(-1, 0, 0), rv(1, 0, 0), rv(0, -1, 1), rv(0, 1, 1)},
                                     {rv(-1, 0, 0), rv(1, 0, 0), rv(0, -1, -1), rv(0, 1, -1)});
        out.push_back(with_root("planted/ee-crossing", q, {Rat(1, 2), Rat(1, 2), Rat(1, 2)}));
    }
    {
        // Contacts exactly at a vertex, on an edge, at t = 0 and at t = 1.
        const RatQuery vertex = rat_query(VF, {rv(1, 0, 1), o, ex, ey}, {rv(1, 0, -1), o, ex, ey});
        out.push_back(with_root("boundary/vf-vertex", vertex, {Rat(1, 2), 1, 0}));
        const RatQuery edge = rat_query(VF, {rv(0.5, 0.5, 1), o, ex, ey}, {rv(0.5, 0.5, -1), o, ex, ey});
        out.push_back(with_root("boundary/vf-edge", edge, {Rat(1, 2), Rat(1, 2), Rat(1, 2)}));
        const RatQuery start = rat_query(VF, {rv(0.25, 0.25, 0), o, ex, ey}, {rv(0.25, 0.25, 1), o, ex, ey});
        out.push_back(with_root("boundary/vf-touch-at-start", start, {0, Rat(1, 4), Rat(1, 4)}));
        const RatQuery end = rat_query(VF, {rv(0.25, 0.25, 1), o, ex, ey}, {rv(0.25, 0.25, 0), o, ex, ey});
        out.push_back(with_root("boundary/vf-touch-at-end", end, {1, Rat(1, 4), Rat(1, 4)}));
        const RatQuery ends = rat_query(EE, {rv(1, 0, 0), rv(2, 0, 0), rv(1, -1, 1), rv(1, 1, 1)},
                                        {rv(1, 0, 0), rv(2, 0, 0), rv(1, -1, -1), rv(1, 1, -1)});
        out.push_back(with_root("boundary/ee-endpoint", ends, {Rat(1, 2), 0, Rat(1, 2)}));
    }
    {
        // Vertex passing through a tumbling triangle twice.
        Draw g(0x2c0b1c);
        const ProfileParams pp = params(Profile::SimulationLike);
        while (true) {
            auto tri = moving_points(g, pp, 3, true);
            for (auto& tr : tri) {
                tr.b = tr.a + g.grid3(1.0, pp.coord_exp);
            }
            auto face_at = [&](const Rat& t, const Rat& u, const Rat& v) {
                const RatVec3 v1 = lerp(tri[0].a, tri[0].b, t);
                return v1 + u * (lerp(tri[1].a, tri[1].b, t) - v1) + v * (lerp(tri[2].a, tri[2].b, t) - v1);
            };
            const Rat t1(1, 4), t2(3, 4);
            const RatVec3 a = face_at(t1, Rat(1, 4), Rat(1, 4));
            const RatVec3 b = face_at(t2, Rat(1, 8), Rat(1, 2));
            const RatVec3 vel = Rat(2) * (b - a);
            const RatQuery q = rat_query(VF, {a - t1 * vel, tri[0].a, tri[1].a, tri[2].a},
                                         {a + (1 - t1) * vel, tri[0].b, tri[1].b, tri[2].b});
            if (representable(q)) {
                if (!oracle::verify_root(q, {t2, Rat(1, 8), Rat(1, 2)})) {
                    throw std::logic_error("second contact does not verify");
                }
                out.push_back(with_root("multi-root/vf-two-contacts", q, {t1, Rat(1, 4), Rat(1, 4)}));
                break;
            }
        }
    }
    {
        // Vertex landing exactly on the edge v1 v3 of a moving triangle; the
        // binary64 root of the coplanarity cubic falls a hair outside the edge.
        const RatQuery q = rat_query(
            VF,
            {rv(-0x1.2d68cabp-1, -0x1.6978f19fp-1, -0x1.a00282cp-6), rv(-0x1.66e6p-1, -0x1.a724p-2, 0x1.39fap-1),
             rv(-0x1.2f8p-5, -0x1.53c1p+0, -0x1.0bbp-2), rv(-0x1.51ep-3, -0x1.3d18p-2, 0x1.ebbp-2)},
            {rv(-0x1.d145956p-2, -0x1.1664f19fp-1, 0x1.980fd7d4p-2), rv(-0x1.9776p-1, -0x1.3bbap-1, 0x1.c518p-2),
             rv(-0x1.d0bp-4, -0x1.8977p+0, -0x1.c2bcp-2), rv(-0x1.fe2p-3, -0x1.137cp-1, 0x1.3334p-2)});
        out.push_back(with_root("rounding/vf-edge-contact", q, {Rat(477, 512), 0, Rat(611, 1024)}));
    }
    out.push_back(three_root_query());
    add_near_misses(out);
    return out;
}

RandomSet gen_random(std::int64_t n, std::uint64_t seed, Profile profile)
{
    if (n < 1) {
        throw UsageError("gen_random: n must be >= 1");
    }
    Draw g(seed);
    const ProfileParams pp = params(profile);
    const Rat margin = oracle::to_rat(kCertifiedMargin);
    RandomSet out;
    out.queries.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const QueryKind kind = (i / 2) % 2 == 0 ? QueryKind::VertexFace : QueryKind::EdgeEdge;
        if (i % 2 == 0) {
            auto [q, w] = planted(g, pp, kind);
            LabeledQuery lq = LabeledQuery::make(q, true, Provenance::Constructed);
            lq.witness = w;
            lq.label = "planted";
            out.queries.push_back(std::move(lq));
            continue;
        }
        while (true) {
            const RatQuery q = near_miss(g, pp, kind);
            if (certify(q, 20'000, margin).kind == oracle::OracleVerdictKind::NoRoot) {
                LabeledQuery lq = LabeledQuery::make(q, false, Provenance::OracleCertified);
                lq.label = "certified";
                out.queries.push_back(std::move(lq));
                break;
            }
            ++out.undecided;
        }
    }
    return out;
}

}  // namespace ccd::dataset
