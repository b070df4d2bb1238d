#include "ccd/baselines.hpp"

#include <algorithm>
#include <limits>

namespace ccd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double x) { return std::nextafter(x, -kInf); }
double up(double x) { return std::nextafter(x, kInf); }

IntervalScalar outward(double lo, double hi)
{
    return {down(lo), up(hi)};
}

}  // namespace

IntervalScalar operator+(const IntervalScalar& a, const IntervalScalar& b)
{
    return outward(a.lo + b.lo, a.hi + b.hi);
}

IntervalScalar operator-(const IntervalScalar& a, const IntervalScalar& b)
{
    return outward(a.lo - b.hi, a.hi - b.lo);
}

IntervalScalar operator*(const IntervalScalar& a, const IntervalScalar& b)
{
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return outward(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

IntervalVec3 interval_F(const Query& q, const DomainBox& box)
{
    const IntervalScalar t{box.t.lo, box.t.hi};
    const IntervalScalar u{box.u.lo, box.u.hi};
    const IntervalScalar v{box.v.lo, box.v.hi};

    std::array<IntervalScalar, 3> out;
    for (int axis = 0; axis < 3; ++axis) {
        std::array<IntervalScalar, 4> pos;
        for (int i = 0; i < 4; ++i) {
            const IntervalScalar s{q.start()[i][axis]};
            const IntervalScalar e{q.end()[i][axis]};
            pos[i] = (e - s) * t + s;
        }
        if (q.kind() == QueryKind::VertexFace) {
            const IntervalScalar face = (pos[2] - pos[1]) * u + (pos[3] - pos[1]) * v + pos[1];
            out[axis] = pos[0] - face;
        } else {
            const IntervalScalar ea = (pos[1] - pos[0]) * u + pos[0];
            const IntervalScalar eb = (pos[3] - pos[2]) * v + pos[2];
            out[axis] = ea - eb;
        }
    }
    return {out[0], out[1], out[2]};
}

CCDResult irf_solve(const Query& q, double delta, std::int64_t max_checks)
{
    CCDResult result;
    std::vector<DomainBox> pending{DomainBox::unit()};
    std::vector<DomainBox> solutions;

    auto earliest = [&](const DomainBox* extra) {
        const DomainBox* best = extra;
        for (const auto* list : {&pending, &solutions}) {
            for (const DomainBox& b : *list) {
                if (best == nullptr || b.t.lo < best->t.lo) {
                    best = &b;
                }
            }
        }
        return best;
    };

    while (!pending.empty()) {
        const DomainBox box = pending.back();
        pending.pop_back();
        ++result.checks;

        const IntervalVec3 f = interval_F(q, box);
        const bool origin_in = f.x.contains(0.0) && f.y.contains(0.0) && f.z.contains(0.0);

        if (origin_in) {
            const double w = std::max({box.t.width(), box.u.width(), box.v.width()});
            if (w < delta) {
                solutions.push_back(box);
            } else {
                const int dim = box.t.width() == w ? 0 : (box.u.width() == w ? 1 : 2);
                DomainBox a = box;
                DomainBox b = box;
                const double mid = box[dim].mid();
                a[dim].hi = mid;
                b[dim].lo = mid;
                a.level = b.level = box.level + 1;
                const bool vf = q.kind() == QueryKind::VertexFace;
                // Later half first so the stack visits earlier times first.
                if (!vf || b.intersects_prism()) {
                    pending.push_back(b);
                }
                if (!vf || a.intersects_prism()) {
                    pending.push_back(a);
                }
            }
        }

        if (result.checks >= max_checks && !pending.empty()) {
            const DomainBox* best = earliest(origin_in ? &box : nullptr);
            result.toi = best->t.lo;
            result.witness = *best;
            result.achieved_tol = best->t.width();
            result.early_terminated = true;
            return result;
        }
    }

    if (const DomainBox* best = earliest(nullptr); best != nullptr) {
        result.toi = best->t.lo;
        result.witness = *best;
        result.achieved_tol = best->t.width();
    }
    return result;
}

namespace {

// Roots in [0, 1] of c0 + c1 t + ... for degree <= 2 derivative polynomials.
std::vector<double> quadratic_roots_unit(double a, double b, double c)
{
    std::vector<double> r;
    if (a == 0.0) {
        if (b != 0.0) {
            r.push_back(-c / b);
        }
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc == 0.0) {
            r.push_back(-b / (2.0 * a));
        } else if (disc > 0.0) {
            const double s = std::sqrt(disc);
            const double qq = -0.5 * (b + std::copysign(s, b));
            r.push_back(qq / a);
            if (qq != 0.0) {
                r.push_back(c / qq);
            }
        }
    }
    std::erase_if(r, [](double x) { return !(x > 0.0 && x < 1.0); });
    std::sort(r.begin(), r.end());
    return r;
}

double bisect_root(const Cubic& f, double lo, double hi)
{
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CubicRoots cubic_roots(const Cubic& f)
{
    CubicRoots out;
    if (f.is_zero()) {
        out.degenerate = true;
        return out;
    }
    // Critical points split [0,1] into monotone pieces.
    const std::vector<double> crit = quadratic_roots_unit(3.0 * f.a, 2.0 * f.b, f.c);
    std::vector<double> knots{0.0};
    knots.insert(knots.end(), crit.begin(), crit.end());
    knots.push_back(1.0);

    std::vector<double>& roots = out.roots;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double lo = knots[i];
        const double hi = knots[i + 1];
        const double flo = f(lo);
        const double fhi = f(hi);
        if (flo == 0.0) {
            roots.push_back(lo);
        } else if (fhi != 0.0 && ((flo < 0.0) != (fhi < 0.0))) {
            roots.push_back(bisect_root(f, lo, hi));
        }
    }
    if (f(1.0) == 0.0) {
        roots.push_back(1.0);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return out;
}

bool univariate_inside(const Query& q, double t, double tol)
{
    if (q.kind() == QueryKind::VertexFace) {
        const Vec3 p = q.position(0, t);
        const Vec3 a = q.position(1, t);
        const Vec3 e0 = q.position(2, t) - a;
        const Vec3 e1 = q.position(3, t) - a;
        const Vec3 r = p - a;
        const double d00 = dot(e0, e0);
        const double d01 = dot(e0, e1);
        const double d11 = dot(e1, e1);
        const double d20 = dot(r, e0);
        const double d21 = dot(r, e1);
        const double denom = d00 * d11 - d01 * d01;
        if (denom == 0.0) {
            return false;
        }
        const double bu = (d11 * d20 - d01 * d21) / denom;
        const double bv = (d00 * d21 - d01 * d20) / denom;
        return bu >= -tol && bv >= -tol && bu + bv <= 1.0 + tol;
    }
    const Vec3 p1 = q.position(0, t);
    const Vec3 d1 = q.position(1, t) - p1;
    const Vec3 p3 = q.position(2, t);
    const Vec3 d2 = q.position(3, t) - p3;
    const Vec3 w = p1 - p3;
    const double a = dot(d1, d1);
    const double b = dot(d1, d2);
    const double c = dot(d2, d2);
    const double d = dot(d1, w);
    const double e = dot(d2, w);
    const double denom = a * c - b * b;
    if (denom == 0.0) {
        return false;
    }
    const double s = (b * e - c * d) / denom;
    const double r = (a * e - b * d) / denom;
    return s >= -tol && s <= 1.0 + tol && r >= -tol && r <= 1.0 + tol;
}

UnivariateResult univariate_solve(const Query& q, double inside_tolerance)
{
    const CubicRoots roots = cubic_roots(coplanarity_cubic(q));
    if (roots.degenerate) {
        return {UnivariateVerdict::Degenerate, 0.0};
    }
    for (double t : roots.roots) {
        if (univariate_inside(q, t, inside_tolerance)) {
            return {UnivariateVerdict::Collision, t};
        }
    }
    return {UnivariateVerdict::NoCollision, 0.0};
}

}  // namespace ccd
