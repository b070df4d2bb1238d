#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ccd/core.hpp"
#include "ccd/solver.hpp"

namespace ccd {

/// Interval with outward rounding by one ulp after every operation.
///
/// Results are nudged to the adjacent representable values instead of
/// switching the FPU rounding mode, so the type is usable from any thread.
struct IntervalScalar {
    double lo = 0.0;
    double hi = 0.0;

    constexpr IntervalScalar() = default;
    constexpr IntervalScalar(double x) : lo(x), hi(x) {}  // NOLINT(google-explicit-constructor)
    constexpr IntervalScalar(double l, double h) : lo(l), hi(h) {}

    bool contains(double x) const { return lo <= x && x <= hi; }
    double width() const { return hi - lo; }
};

IntervalScalar operator+(const IntervalScalar& a, const IntervalScalar& b);
IntervalScalar operator-(const IntervalScalar& a, const IntervalScalar& b);
IntervalScalar operator*(const IntervalScalar& a, const IntervalScalar& b);

struct IntervalVec3 {
    IntervalScalar x, y, z;
};

/// F over a whole domain box, evaluated in interval arithmetic.
IntervalVec3 interval_F(const Query& q, const DomainBox& box);

/// Generic inclusion-based bisection root finder.
///
/// Every box whose interval enclosure of F contains the origin is bisected
/// along its widest domain dimension until all sides are below `delta`; the
/// surviving boxes form the solution set and the earliest left t endpoint is
/// returned. After `max_checks` boxes the earliest t among all unresolved and
/// accepted boxes is returned with early_terminated set.
CCDResult irf_solve(const Query& q, double delta = 1e-6, std::int64_t max_checks = 1'000'000);

struct CubicRoots {
    /// All four coefficients are zero: every t is a root.
    bool degenerate = false;
    /// Real roots in [0, 1], ascending.
    std::vector<double> roots;
};

/// Real roots in [0, 1] of a cubic (or lower-degree) polynomial.
///
/// The interval is cut at the critical points into monotone pieces and each
/// sign change is bisected to full double precision. Tangential roots are
/// reported only when the polynomial evaluates to exactly zero there.
CubicRoots cubic_roots(const Cubic& f);

enum class UnivariateVerdict { NoCollision, Collision, Degenerate };

struct UnivariateResult {
    UnivariateVerdict verdict = UnivariateVerdict::NoCollision;
    double t = 0.0;
};

/// Coplanarity-cubic method: roots of <n(t), q(t)> in [0, 1], each checked
/// with a floating-point inside test at the root time (barycentric for
/// vertex-face, segment parameters for edge-edge). `inside_tolerance`
/// widens the inside test; the default 0 is strict.
UnivariateResult univariate_solve(const Query& q, double inside_tolerance = 0.0);

/// Floating-point inside test used by univariate_solve at a given time.
bool univariate_inside(const Query& q, double t, double inside_tolerance = 0.0);

}  // namespace ccd
