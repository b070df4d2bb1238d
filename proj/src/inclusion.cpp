#include "ccd/inclusion.hpp"

#include <algorithm>
#include <cmath>

#include "ccd/errors.hpp"

namespace ccd {

namespace {

struct CornerParams {
    alignas(64) std::array<double, 8> t;
    alignas(64) std::array<double, 8> u;
    alignas(64) std::array<double, 8> v;
};

CornerParams corner_params(const DomainBox& box)
{
    CornerParams c;
    for (int i = 0; i < 8; ++i) {
        c.t[i] = (i & 4) ? box.t.hi : box.t.lo;
        c.u[i] = (i & 2) ? box.u.hi : box.u.lo;
        c.v[i] = (i & 1) ? box.v.hi : box.v.lo;
    }
    return c;
}

CornerValues corners_vf(const Query& q, const CornerParams& c, int axis)
{
    const auto& s = q.start();
    const auto& e = q.end();
    const double p0 = s[0][axis], p1 = e[0][axis];
    const double a0 = s[1][axis], a1 = e[1][axis];
    const double b0 = s[2][axis], b1 = e[2][axis];
    const double c0 = s[3][axis], c1 = e[3][axis];

    CornerValues out;
    for (int i = 0; i < 8; ++i) {
        const double p = (p1 - p0) * c.t[i] + p0;
        const double a = (a1 - a0) * c.t[i] + a0;
        const double b = (b1 - b0) * c.t[i] + b0;
        const double cc = (c1 - c0) * c.t[i] + c0;
        const double face = (b - a) * c.u[i] + (cc - a) * c.v[i] + a;
        out[i] = p - face;
    }
    return out;
}

CornerValues corners_ee(const Query& q, const CornerParams& c, int axis)
{
    const auto& s = q.start();
    const auto& e = q.end();
    const double a0 = s[0][axis], a1 = e[0][axis];
    const double b0 = s[1][axis], b1 = e[1][axis];
    const double c0 = s[2][axis], c1 = e[2][axis];
    const double d0 = s[3][axis], d1 = e[3][axis];

    CornerValues out;
    for (int i = 0; i < 8; ++i) {
        const double a = (a1 - a0) * c.t[i] + a0;
        const double b = (b1 - b0) * c.t[i] + b0;
        const double cc = (c1 - c0) * c.t[i] + c0;
        const double d = (d1 - d0) * c.t[i] + d0;
        const double ea = (b - a) * c.u[i] + a;
        const double eb = (d - cc) * c.v[i] + cc;
        out[i] = ea - eb;
    }
    return out;
}

std::pair<double, double> min_max(const CornerValues& values)
{
    double lo = values[0];
    double hi = values[0];
    for (int i = 1; i < 8; ++i) {
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
    }
    return {lo, hi};
}

}  // namespace

CornerValues corner_values(const Query& q, const DomainBox& box, int axis)
{
    const CornerParams c = corner_params(box);
    return q.kind() == QueryKind::VertexFace ? corners_vf(q, c, axis) : corners_ee(q, c, axis);
}

std::array<CornerValues, 3> corner_values(const Query& q, const DomainBox& box)
{
    const CornerParams c = corner_params(box);
    if (q.kind() == QueryKind::VertexFace) {
        return {corners_vf(q, c, 0), corners_vf(q, c, 1), corners_vf(q, c, 2)};
    }
    return {corners_ee(q, c, 0), corners_ee(q, c, 1), corners_ee(q, c, 2)};
}

double InclusionBox::width() const
{
    return std::max({axis[0].width(), axis[1].width(), axis[2].width()});
}

InclusionBox box_inclusion(const Query& q, const DomainBox& box)
{
    const auto values = corner_values(q, box);
    InclusionBox out;
    for (int k = 0; k < 3; ++k) {
        const auto [lo, hi] = min_max(values[k]);
        out.axis[k] = {lo, hi};
    }
    return out;
}

Gamma compute_gamma(std::span<const Vec3> points)
{
    if (points.empty()) {
        throw UsageError("compute_gamma needs at least one point");
    }
    Gamma g{1.0, 1.0, 1.0};
    for (const Vec3& p : points) {
        for (int k = 0; k < 3; ++k) {
            g[k] = std::max(g[k], std::abs(p[k]));
        }
    }
    return g;
}

Gamma compute_gamma(const Query& q)
{
    const auto pts = q.all_points();
    return compute_gamma(std::span<const Vec3>(pts));
}

Gamma max_gamma(const Gamma& a, const Gamma& b)
{
    return {std::max(a[0], b[0]), std::max(a[1], b[1]), std::max(a[2], b[2])};
}

FilterEps compute_filters(QueryKind kind, const Gamma& gamma, double separation)
{
    for (double g : gamma) {
        if (!(g >= 1.0) || !std::isfinite(g)) {
            throw PreconditionError("gamma must be finite and >= 1");
        }
    }
    if (!(separation >= 0.0)) {
        throw PreconditionError("separation must be non-negative");
    }
    const bool shifted = separation > 0.0;
    if (shifted && !(separation < std::min({gamma[0], gamma[1], gamma[2]}))) {
        throw PreconditionError("separation must be smaller than min(gamma)");
    }

    double c = 0.0;
    if (kind == QueryKind::VertexFace) {
        c = shifted ? filter_constants::vertex_face_separation : filter_constants::vertex_face;
    } else {
        c = shifted ? filter_constants::edge_edge_separation : filter_constants::edge_edge;
    }

    FilterEps f;
    f.gamma = gamma;
    f.kind = kind;
    f.separation_adjusted = shifted;
    for (int k = 0; k < 3; ++k) {
        f.eps[k] = c * gamma[k] * gamma[k] * gamma[k];
    }
    return f;
}

BoxClass classify_axis(const CornerValues& values, double eps, double separation)
{
    const auto [lo, hi] = min_max(values);
    const double lo_d = lo - separation;
    const double hi_d = hi + separation;
    if (lo_d > eps || hi_d < -eps) {
        return BoxClass::Disjoint;
    }
    if (lo_d >= -eps && hi_d <= eps) {
        return BoxClass::Contained;
    }
    return BoxClass::Intersects;
}

BoxClass classify_box(const InclusionBox& box, const FilterEps& eps, double separation)
{
    if (separation > 0.0 && !eps.separation_adjusted) {
        throw UsageError("classify_box: filters were computed without separation");
    }
    bool contained = true;
    for (int k = 0; k < 3; ++k) {
        const double lo = box.axis[k].lo - separation;
        const double hi = box.axis[k].hi + separation;
        if (lo > eps.eps[k] || hi < -eps.eps[k]) {
            return BoxClass::Disjoint;
        }
        contained = contained && lo >= -eps.eps[k] && hi <= eps.eps[k];
    }
    return contained ? BoxClass::Contained : BoxClass::Intersects;
}

std::array<double, 3> kappas(const Query& q)
{
    // Corner index 4*ti + 2*ui + vi; pairs differ in exactly one bit.
    const auto values = corner_values(q, DomainBox::unit());
    std::array<double, 3> k{0.0, 0.0, 0.0};
    constexpr std::array<int, 3> bit{4, 2, 1};
    for (int dim = 0; dim < 3; ++dim) {
        double m = 0.0;
        for (int i = 0; i < 8; ++i) {
            if (i & bit[dim]) {
                continue;
            }
            const int j = i | bit[dim];
            for (int axis = 0; axis < 3; ++axis) {
                m = std::max(m, std::abs(values[axis][i] - values[axis][j]));
            }
        }
        k[dim] = 3.0 * m;
    }
    return k;
}

}  // namespace ccd
