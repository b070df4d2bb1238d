#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "ccd/core.hpp"

namespace ccd::oracle {

/// Exact rational number (canonical: reduced, positive denominator).
using Rat = mpq_class;

/// Exact conversion; every finite double is a dyadic rational.
Rat to_rat(double x);

/// Correctly rounded (round-to-nearest, ties-to-even) conversion to binary64.
/// Throws PreconditionError when the magnitude overflows.
double to_double(const Rat& x);

struct RatVec3 {
    Rat x, y, z;

    const Rat& operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    Rat& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
    bool operator==(const RatVec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

RatVec3 to_rat(const Vec3& v);
Vec3 to_double(const RatVec3& v);

/// A query with exact rational coordinates, point order as in ccd::Query.
struct RatQuery {
    QueryKind kind = QueryKind::VertexFace;
    std::array<RatVec3, 4> start;
    std::array<RatVec3, 4> end;

    static RatQuery from(const Query& q);
    /// Rounds every coordinate to the nearest double.
    Query to_query() const;

    bool operator==(const RatQuery& o) const { return kind == o.kind && start == o.start && end == o.end; }
};

/// Exact value of F (vertex-face or edge-edge, by kind) at (t, u, v).
RatVec3 rational_eval_F(const RatQuery& q, const Rat& t, const Rat& u, const Rat& v);
RatVec3 rational_eval_F(const Query& q, const Rat& t, const Rat& u, const Rat& v);

/// Exact witness (t, u, v) of a contact.
struct RootWitness {
    Rat t, u, v;
};

/// True iff (t, u, v) lies in the query's domain and F vanishes there exactly
/// (or, with separation d > 0, ||F||_inf <= d).
bool verify_root(const RatQuery& q, const RootWitness& w, const Rat& separation = 0);

enum class OracleVerdictKind { NoRoot, Root, Undetermined };

struct OracleVerdict {
    OracleVerdictKind kind = OracleVerdictKind::Undetermined;
    /// Present when kind == Root.
    std::optional<RootWitness> root;
    /// Boxes examined by the certifier (0 for witnesses).
    std::int64_t boxes = 0;
};

struct CertifyOptions {
    /// Maximum number of bisections along any single dimension.
    int depth_cap = 64;
    /// Half-width of the closed cube around the origin that must be avoided.
    Rat separation = 0;
    /// Time range searched, [t_lo, t_hi].
    Rat t_lo = 0;
    Rat t_hi = 1;
    /// Give up (Undetermined) after this many boxes.
    std::int64_t max_boxes = 4'000'000;
};

/// Exact corner-box bisection over the query domain. Returns NoRoot only if
/// every explored box's exact enclosure misses the cube [-d, d]^3, which
/// proves ||F||_inf > d everywhere on the searched domain; otherwise
/// Undetermined.
OracleVerdict certify_no_root(const RatQuery& q, const CertifyOptions& opts = {});

/// Closed interval [lo, hi] containing exactly one root (lo == hi when the
/// root is rational and found exactly).
struct RootInterval {
    Rat lo, hi;
};

struct CubicIsolation {
    bool infinitely_many = false;
    std::vector<RootInterval> intervals;
};

/// Isolates the distinct real roots of a t^3 + b t^2 + c t + d in [0, 1]
/// with a Sturm sequence of the square-free part; exact throughout.
CubicIsolation isolate_cubic_roots(const Rat& a, const Rat& b, const Rat& c, const Rat& d);

/// Shrinks an isolating interval by exact sign bisection until its width is
/// at most `width`.
RootInterval refine_root(const Rat& a, const Rat& b, const Rat& c, const Rat& d, RootInterval iv, const Rat& width);

/// Inflection point -b / (3a) of a cubic when a != 0, confirmed by a sign
/// change of the second derivative around it.
std::optional<Rat> cubic_inflection(const Rat& a, const Rat& b, const Rat& c, const Rat& d);

/// Exact coplanarity cubic coefficients (a, b, c, d) of a rational query.
std::array<Rat, 4> rational_coplanarity_cubic(const RatQuery& q);

}  // namespace ccd::oracle
