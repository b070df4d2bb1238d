#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace ccd {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr bool operator==(const Vec3&) const = default;

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm_inf(const Vec3& v) { return std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)}); }

enum class QueryKind : std::uint8_t { VertexFace, EdgeEdge };

std::string_view to_string(QueryKind kind);

/// Two primitives with linear trajectories between t=0 and t=1.
///
/// Point order is fixed: vertex-face queries hold (p, v1, v2, v3), edge-edge
/// queries hold (p1, p2, p3, p4) where (p1, p2) and (p3, p4) are the edges.
/// All eight points must be finite; construction throws UsageError otherwise.
class Query {
public:
    using Points = std::array<Vec3, 4>;

    Query(QueryKind kind, const Points& start, const Points& end);

    static Query vertex_face(const Points& start, const Points& end) { return {QueryKind::VertexFace, start, end}; }
    static Query edge_edge(const Points& start, const Points& end) { return {QueryKind::EdgeEdge, start, end}; }

    QueryKind kind() const noexcept { return kind_; }
    const Points& start() const noexcept { return start_; }
    const Points& end() const noexcept { return end_; }

    /// Position of point i at time t, interpolated as (p1 - p0) * t + p0.
    Vec3 position(int i, double t) const;

    /// All eight points, start positions first.
    std::array<Vec3, 8> all_points() const;

    bool operator==(const Query&) const = default;

private:
    QueryKind kind_;
    Points start_;
    Points end_;
};

/// Vertex-face gap p(t) - ((1-u-v) v1(t) + u v2(t) + v v3(t)).
///
/// Evaluated in the difference form v1 + u (v2 - v1) + v (v3 - v1); the
/// rounding bounds in inclusion.hpp are stated for this operation order.
Vec3 eval_F_vf(const Query& q, double t, double u, double v);

/// Edge-edge gap ((1-u) p1(t) + u p2(t)) - ((1-v) p3(t) + v p4(t)).
Vec3 eval_F_ee(const Query& q, double t, double u, double v);

/// Dispatches on q.kind().
Vec3 eval_F(const Query& q, double t, double u, double v);

/// Coefficients of f(t) = a t^3 + b t^2 + c t + d.
struct Cubic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    double operator()(double t) const { return ((a * t + b) * t + c) * t + d; }
    bool is_zero() const { return a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0; }
    bool operator==(const Cubic&) const = default;
};

/// Expands the coplanarity polynomial <n(t), q(t)> into monomial form.
///
/// Vertex-face: n = (v2 - v1) x (v3 - v1), q = p - v1.
/// Edge-edge:   n = (p2 - p1) x (p4 - p3), q = p3 - p1.
Cubic coplanarity_cubic(const Query& q);

/// The (n(t), q(t)) pair of the coplanarity test evaluated directly at t.
std::pair<Vec3, Vec3> coplanarity_vectors(const Query& q, double t);

}  // namespace ccd
