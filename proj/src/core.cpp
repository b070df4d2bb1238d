#include "ccd/core.hpp"

#include "ccd/errors.hpp"

namespace ccd {

std::string_view to_string(QueryKind kind)
{
    return kind == QueryKind::VertexFace ? "vertex-face" : "edge-edge";
}

Query::Query(QueryKind kind, const Points& start, const Points& end) : kind_(kind), start_(start), end_(end)
{
    for (int i = 0; i < 4; ++i) {
        if (!start_[i].is_finite() || !end_[i].is_finite()) {
            throw UsageError("query points must be finite");
        }
    }
}

Vec3 Query::position(int i, double t) const
{
    return (end_[i] - start_[i]) * t + start_[i];
}

std::array<Vec3, 8> Query::all_points() const
{
    return {start_[0], start_[1], start_[2], start_[3], end_[0], end_[1], end_[2], end_[3]};
}

Vec3 eval_F_vf(const Query& q, double t, double u, double v)
{
    if (q.kind() != QueryKind::VertexFace) {
        throw UsageError("eval_F_vf called on an edge-edge query");
    }
    const Vec3 p = q.position(0, t);
    const Vec3 v1 = q.position(1, t);
    const Vec3 v2 = q.position(2, t);
    const Vec3 v3 = q.position(3, t);
    const Vec3 face = (v2 - v1) * u + (v3 - v1) * v + v1;
    return p - face;
}

Vec3 eval_F_ee(const Query& q, double t, double u, double v)
{
    if (q.kind() != QueryKind::EdgeEdge) {
        throw UsageError("eval_F_ee called on a vertex-face query");
    }
    const Vec3 p1 = q.position(0, t);
    const Vec3 p2 = q.position(1, t);
    const Vec3 p3 = q.position(2, t);
    const Vec3 p4 = q.position(3, t);
    const Vec3 ea = (p2 - p1) * u + p1;
    const Vec3 eb = (p4 - p3) * v + p3;
    return ea - eb;
}

Vec3 eval_F(const Query& q, double t, double u, double v)
{
    return q.kind() == QueryKind::VertexFace ? eval_F_vf(q, t, u, v) : eval_F_ee(q, t, u, v);
}

namespace {

struct LinearVec {
    Vec3 at0;
    Vec3 slope;
};

LinearVec difference(const Query& q, int to, int from)
{
    const Vec3 at0 = q.start()[to] - q.start()[from];
    const Vec3 at1 = q.end()[to] - q.end()[from];
    return {at0, at1 - at0};
}

}  // namespace

Cubic coplanarity_cubic(const Query& q)
{
    LinearVec a, b, r;
    if (q.kind() == QueryKind::VertexFace) {
        a = difference(q, 2, 1);
        b = difference(q, 3, 1);
        r = difference(q, 0, 1);
    } else {
        a = difference(q, 1, 0);
        b = difference(q, 3, 2);
        r = difference(q, 2, 0);
    }
    // n(t) = n0 + n1 t + n2 t^2
    const Vec3 n0 = cross(a.at0, b.at0);
    const Vec3 n1 = cross(a.at0, b.slope) + cross(a.slope, b.at0);
    const Vec3 n2 = cross(a.slope, b.slope);

    Cubic f;
    f.a = dot(n2, r.slope);
    f.b = dot(n1, r.slope) + dot(n2, r.at0);
    f.c = dot(n0, r.slope) + dot(n1, r.at0);
    f.d = dot(n0, r.at0);
    return f;
}

std::pair<Vec3, Vec3> coplanarity_vectors(const Query& q, double t)
{
    if (q.kind() == QueryKind::VertexFace) {
        const Vec3 v1 = q.position(1, t);
        return {cross(q.position(2, t) - v1, q.position(3, t) - v1), q.position(0, t) - v1};
    }
    const Vec3 p1 = q.position(0, t);
    const Vec3 p3 = q.position(2, t);
    return {cross(q.position(1, t) - p1, q.position(3, t) - p3), p3 - p1};
}

}  // namespace ccd
