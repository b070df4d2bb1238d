#pragma once

#include <algorithm>
#include <array>
#include <span>

#include "ccd/core.hpp"

namespace ccd {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr double width() const { return hi - lo; }
    constexpr double mid() const { return (lo + hi) * 0.5; }
    constexpr bool contains(double x) const { return lo <= x && x <= hi; }
    constexpr bool operator==(const Interval&) const = default;
};

/// A sub-box of the (t, u, v) parameter domain plus its bisection depth.
struct DomainBox {
    Interval t{0.0, 1.0};
    Interval u{0.0, 1.0};
    Interval v{0.0, 1.0};
    int level = 0;

    static DomainBox unit(double t_max = 1.0) { return {{0.0, t_max}, {0.0, 1.0}, {0.0, 1.0}, 0}; }

    const Interval& operator[](int dim) const { return dim == 0 ? t : (dim == 1 ? u : v); }
    Interval& operator[](int dim) { return dim == 0 ? t : (dim == 1 ? u : v); }

    /// A vertex-face box meets the prism u + v <= 1 iff its lowest (u, v) corner does.
    bool intersects_prism() const { return u.lo + v.lo <= 1.0; }

    bool operator==(const DomainBox&) const = default;
};

/// Corner order used by every 8-wide batch: index = 4*ti + 2*ui + vi,
/// where ti/ui/vi select the lower (0) or upper (1) end of each interval.
using CornerValues = std::array<double, 8>;

/// One coordinate axis of F at the eight corners of a domain box.
///
/// The eight evaluations are independent and written as straight-line loops
/// over fixed-size arrays so the compiler emits packed SIMD arithmetic.
CornerValues corner_values(const Query& q, const DomainBox& box, int axis);

/// All three axes of F at the eight corners.
std::array<CornerValues, 3> corner_values(const Query& q, const DomainBox& box);

/// Axis-aligned co-domain box [lo.x, hi.x] x [lo.y, hi.y] x [lo.z, hi.z].
struct InclusionBox {
    std::array<Interval, 3> axis{};

    /// Largest side length.
    double width() const;
    bool operator==(const InclusionBox&) const = default;
};

/// Component-wise min/max of F over the eight corners of the domain box;
/// this is the tightest axis-aligned enclosure of F over the box.
InclusionBox box_inclusion(const Query& q, const DomainBox& box);

/// Per-axis coordinate magnitude bound: max(|coordinate|, 1).
using Gamma = std::array<double, 3>;

Gamma compute_gamma(std::span<const Vec3> points);

/// Gamma of a single query's eight points.
Gamma compute_gamma(const Query& q);

/// Elementwise max; used to merge per-query bounds into a scene bound.
Gamma max_gamma(const Gamma& a, const Gamma& b);

/// Forward rounding-error bounds of the binary64 evaluation of F.
///
/// eps[k] = c * gamma[k]^3, with c depending on the primitive kind and on
/// whether the separation shift (+-d) is part of the evaluated expression.
struct FilterEps {
    std::array<double, 3> eps{};
    Gamma gamma{1.0, 1.0, 1.0};
    QueryKind kind = QueryKind::VertexFace;
    bool separation_adjusted = false;

    double max_eps() const { return std::max({eps[0], eps[1], eps[2]}); }
};

namespace filter_constants {
inline constexpr double vertex_face = 6.661338147750939e-15;
inline constexpr double edge_edge = 6.217248937900877e-15;
inline constexpr double vertex_face_separation = 7.549516567451064e-15;
inline constexpr double edge_edge_separation = 7.105427357601002e-15;
}  // namespace filter_constants

/// Throws PreconditionError unless gamma >= 1 on every axis and, for d > 0,
/// d < min(gamma).
FilterEps compute_filters(QueryKind kind, const Gamma& gamma, double separation);

enum class BoxClass { Disjoint, Intersects, Contained };

/// Classifies the box enlarged by `separation` on every face against the
/// filter cube [-eps, eps]^3. Axes are tested in x, y, z order and the first
/// separated axis returns Disjoint. Touching boundaries are never Disjoint.
BoxClass classify_box(const InclusionBox& box, const FilterEps& eps, double separation);

/// Single-axis version of classify_box over raw corner values. Returns
/// Disjoint, or Contained/Intersects for that axis alone.
BoxClass classify_axis(const CornerValues& values, double eps, double separation);

/// Per-dimension stretch factors (kappa_t, kappa_u, kappa_v): three times the
/// largest infinity-norm change of F across the full extent of that
/// dimension, taken over the four corner pairs of the other two.
std::array<double, 3> kappas(const Query& q);

}  // namespace ccd
