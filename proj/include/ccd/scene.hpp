#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ccd/core.hpp"
#include "ccd/inclusion.hpp"
#include "ccd/solver.hpp"

namespace ccd::scene {

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Vertex positions at the start (x0) and end (x1) of a step plus the
/// primitives built on them. Every vertex, edge and triangle may touch every
/// other one that does not share a vertex with it.
struct TriMeshPair {
    std::vector<Vec3> x0;
    std::vector<Vec3> x1;
    std::vector<Triangle> triangles;
    std::vector<Edge> edges;

    /// Unique undirected edges of `triangles`, each stored as (lo, hi).
    static std::vector<Edge> edges_of(std::span<const Triangle> triangles);

    /// Builds the pair with edges derived from the triangles.
    static TriMeshPair from_triangles(std::vector<Vec3> x0, std::vector<Vec3> x1, std::vector<Triangle> triangles);

    /// Throws UsageError on mismatched sizes, out-of-range or repeated
    /// indices, or non-finite positions.
    void validate() const;

    /// Per-axis max(|coordinate|, 1) over both position sets.
    Gamma gamma() const;
};

/// A broad-phase pair. For vertex-face, `a` is the vertex and `b` the
/// triangle index; for edge-edge both are edge indices with a < b.
struct ContactCandidate {
    QueryKind kind = QueryKind::VertexFace;
    int a = 0;
    int b = 0;
    /// Vertex indices in query point order.
    std::array<int, 4> vertices{};
    Query query;

    bool operator==(const ContactCandidate&) const = default;
};

/// Candidates whose swept boxes (each primitive's positions at both ends of
/// the step, grown by `inflation` on every side) overlap. Uses a uniform grid
/// whose cell size is the mean swept-box diagonal. Sorted by (kind, a, b).
std::vector<ContactCandidate> broad_phase(const TriMeshPair& mesh, double inflation = 0.0);

/// The same candidate set computed by testing every pair; for validation.
std::vector<ContactCandidate> all_pairs(const TriMeshPair& mesh, double inflation = 0.0);

struct ActiveContact {
    ContactCandidate candidate;
    double toi = 0.0;
    /// Last box reported by the solver; (u, v) locate the contact points.
    DomainBox witness;
    double achieved_tol = 0.0;
};

struct ActiveSetConfig {
    double delta = 1e-6;
    std::int64_t max_checks = 1'000'000;
    /// Constraint offset; pairs closer than this are activated.
    double separation = 0.0;
};

/// Runs the solver with scene-wide filters on every broad-phase candidate
/// (inflation separation + delta) and keeps those with a time of impact.
std::vector<ActiveContact> construct_active_set(const TriMeshPair& mesh, const ActiveSetConfig& cfg = {});

/// Lower bound on the L-infinity distance between the candidate's primitives
/// at the start of the step: Euclidean distance / sqrt(3), stepped down one
/// ulp. Degenerate triangles fall back to distances to their edges.
double primitive_distance_lb(const ContactCandidate& c);

/// Euclidean distance between point p and triangle (a, b, c).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Euclidean distance between segments (p1, p2) and (q1, q2).
double segment_segment_distance(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2);

struct LineSearchOptions {
    /// Assumed error of the distance computation.
    double rho = 1e-9;
    /// Energy halving stops once alpha falls to this value.
    double alpha_min = 1e-10;
    /// Optional upper bound on the separation handed to the solver.
    std::optional<double> separation_cap;
    /// Broad-phase growth; zero selects delta.
    double inflation = 0.0;
    /// Number of validate/re-run rounds before InfeasibleStepError.
    int max_rounds = 64;
};

/// Per-candidate values the step was validated with.
struct ValidatedPair {
    ContactCandidate candidate;
    double distance_lb = 0.0;
    double p = 0.0;
    /// Separation the solver enforced over [0, alpha].
    double separation = 0.0;
    double eps = 0.0;
    /// Co-domain width achieved by the solver for this pair.
    double achieved_delta = 0.0;
    std::optional<double> toi;
};

struct LineSearchResult {
    double alpha = 1.0;
    /// Step bound from collision checking alone, before energy halving.
    double ccd_alpha = 1.0;
    std::vector<ValidatedPair> pairs;
    int rounds = 0;
};

/// Caller-supplied test E(x0 + alpha * dx) < E(x0).
using EnergyDecreases = std::function<bool(double alpha)>;

/// Step-length bound along `dx` keeping every candidate pair at least its
/// validated separation p_i * d_i apart, followed by halving on the energy
/// predicate. `mesh.x1` is ignored; the step ends at x0 + dx.
///
/// Throws UsageError unless 0 < p < 1 and dx is finite with one entry per
/// vertex, and InfeasibleStepError when a pair is too close to validate.
LineSearchResult line_search(const TriMeshPair& mesh, std::span<const Vec3> dx, double p, double delta,
                             std::int64_t max_checks, const EnergyDecreases& energy_decreases = {},
                             const LineSearchOptions& opts = {});

/// line_search(...).alpha
double line_search_step(const TriMeshPair& mesh, std::span<const Vec3> dx, double p, double delta,
                        std::int64_t max_checks, const EnergyDecreases& energy_decreases = {},
                        const LineSearchOptions& opts = {});

/// Vertices and triangles of a Wavefront OBJ file. Reads "v" and "f" records
/// only; polygons are fanned into triangles and "i/j/k" and negative indices
/// are accepted.
struct ObjMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
};

/// Throws ParseError (zero-based line index) on malformed records.
ObjMesh parse_obj(std::istream& in);
ObjMesh load_obj(const std::filesystem::path& path);

}  // namespace ccd::scene
