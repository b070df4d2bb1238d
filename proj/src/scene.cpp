#include "ccd/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>

#include "ccd/errors.hpp"

namespace ccd::scene {

// ---------------------------------------------------------------------------
// Mesh

std::vector<Edge> TriMeshPair::edges_of(std::span<const Triangle> triangles)
{
    std::vector<Edge> edges;
    edges.reserve(triangles.size() * 3);
    for (const Triangle& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k];
            const int b = t[(k + 1) % 3];
            edges.push_back({std::min(a, b), std::max(a, b)});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

TriMeshPair TriMeshPair::from_triangles(std::vector<Vec3> x0, std::vector<Vec3> x1, std::vector<Triangle> triangles)
{
    TriMeshPair m;
    m.x0 = std::move(x0);
    m.x1 = std::move(x1);
    m.edges = edges_of(triangles);
    m.triangles = std::move(triangles);
    m.validate();
    return m;
}

void TriMeshPair::validate() const
{
    if (x0.size() != x1.size()) {
        throw UsageError("mesh: x0 and x1 differ in length");
    }
    const int n = static_cast<int>(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        if (!x0[i].is_finite() || !x1[i].is_finite()) {
            throw UsageError("mesh: non-finite position at vertex " + std::to_string(i));
        }
    }
    auto in_range = [n](int i) { return i >= 0 && i < n; };
    for (const Triangle& t : triangles) {
        if (!in_range(t[0]) || !in_range(t[1]) || !in_range(t[2])) {
            throw UsageError("mesh: triangle index out of range");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw UsageError("mesh: triangle repeats a vertex");
        }
    }
    for (const Edge& e : edges) {
        if (!in_range(e[0]) || !in_range(e[1])) {
            throw UsageError("mesh: edge index out of range");
        }
        if (e[0] == e[1]) {
            throw UsageError("mesh: edge repeats a vertex");
        }
    }
}

Gamma TriMeshPair::gamma() const
{
    Gamma g = x0.empty() ? Gamma{1.0, 1.0, 1.0} : compute_gamma(x0);
    if (!x1.empty()) {
        g = max_gamma(g, compute_gamma(x1));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Broad phase

namespace {

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void add(const Vec3& p)
    {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    void grow(double r)
    {
        for (int k = 0; k < 3; ++k) {
            lo[k] -= r;
            hi[k] += r;
        }
    }
    bool overlaps(const Aabb& o) const
    {
        for (int k = 0; k < 3; ++k) {
            if (lo[k] > o.hi[k] || o.lo[k] > hi[k]) {
                return false;
            }
        }
        return true;
    }
    double diagonal() const
    {
        const Vec3 d = hi - lo;
        return std::sqrt(dot(d, d));
    }
};

template <std::size_t N>
Aabb swept_box(const TriMeshPair& m, const std::array<int, N>& ids, double r)
{
    Aabb b;
    for (int i : ids) {
        b.add(m.x0[static_cast<std::size_t>(i)]);
        b.add(m.x1[static_cast<std::size_t>(i)]);
    }
    b.grow(r);
    return b;
}

template <std::size_t N, std::size_t M>
bool shares_vertex(const std::array<int, N>& a, const std::array<int, M>& b)
{
    for (int x : a) {
        for (int y : b) {
            if (x == y) {
                return true;
            }
        }
    }
    return false;
}

ContactCandidate make_vf(const TriMeshPair& m, int vertex, int tri)
{
    const Triangle& t = m.triangles[static_cast<std::size_t>(tri)];
    const std::array<int, 4> ids{vertex, t[0], t[1], t[2]};
    Query::Points s, e;
    for (int k = 0; k < 4; ++k) {
        s[k] = m.x0[static_cast<std::size_t>(ids[k])];
        e[k] = m.x1[static_cast<std::size_t>(ids[k])];
    }
    return {QueryKind::VertexFace, vertex, tri, ids, Query::vertex_face(s, e)};
}

ContactCandidate make_ee(const TriMeshPair& m, int ea, int eb)
{
    const Edge& a = m.edges[static_cast<std::size_t>(ea)];
    const Edge& b = m.edges[static_cast<std::size_t>(eb)];
    const std::array<int, 4> ids{a[0], a[1], b[0], b[1]};
    Query::Points s, e;
    for (int k = 0; k < 4; ++k) {
        s[k] = m.x0[static_cast<std::size_t>(ids[k])];
        e[k] = m.x1[static_cast<std::size_t>(ids[k])];
    }
    return {QueryKind::EdgeEdge, ea, eb, ids, Query::edge_edge(s, e)};
}

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const
    {
        // Large odd multipliers spread neighbouring cells across buckets.
        return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
    }
};

// Boxes spanning more cells than this go to a list tested against everything.
constexpr std::int64_t kMaxCellsPerBox = 4096;

class Grid {
public:
    Grid(double cell, Vec3 origin) : cell_(cell), origin_(origin) {}

    void insert(int id, const Aabb& b)
    {
        const auto [lo, hi] = range(b);
        if (cell_count(lo, hi) > kMaxCellsPerBox) {
            oversized_.push_back(id);
            return;
        }
        for_cells(lo, hi, [&](const CellKey& k) { cells_[k].push_back(id); });
    }

    /// Sorted ids sharing a cell with `b`, plus every oversized id.
    void query(const Aabb& b, std::vector<int>& out) const
    {
        out.assign(oversized_.begin(), oversized_.end());
        const auto [lo, hi] = range(b);
        if (cell_count(lo, hi) > kMaxCellsPerBox) {
            for (const auto& [key, ids] : cells_) {
                out.insert(out.end(), ids.begin(), ids.end());
            }
        } else {
            for_cells(lo, hi, [&](const CellKey& k) {
                if (auto it = cells_.find(k); it != cells_.end()) {
                    out.insert(out.end(), it->second.begin(), it->second.end());
                }
            });
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }

private:
    std::pair<CellKey, CellKey> range(const Aabb& b) const
    {
        auto idx = [&](double x, int k) { return static_cast<std::int64_t>(std::floor((x - origin_[k]) / cell_)); };
        return {{idx(b.lo.x, 0), idx(b.lo.y, 1), idx(b.lo.z, 2)}, {idx(b.hi.x, 0), idx(b.hi.y, 1), idx(b.hi.z, 2)}};
    }
    static std::int64_t cell_count(const CellKey& lo, const CellKey& hi)
    {
        const std::int64_t nx = hi.x - lo.x + 1, ny = hi.y - lo.y + 1, nz = hi.z - lo.z + 1;
        if (nx > kMaxCellsPerBox || ny > kMaxCellsPerBox || nz > kMaxCellsPerBox) {
            return kMaxCellsPerBox + 1;
        }
        return nx * ny * nz;
    }
    template <class F>
    static void for_cells(const CellKey& lo, const CellKey& hi, F&& f)
    {
        for (std::int64_t x = lo.x; x <= hi.x; ++x) {
            for (std::int64_t y = lo.y; y <= hi.y; ++y) {
                for (std::int64_t z = lo.z; z <= hi.z; ++z) {
                    f(CellKey{x, y, z});
                }
            }
        }
    }

    double cell_;
    Vec3 origin_;
    std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
    std::vector<int> oversized_;
};

struct SweptBoxes {
    std::vector<Aabb> vertices, triangles, edges;
};

SweptBoxes swept_boxes(const TriMeshPair& m, double r)
{
    SweptBoxes s;
    for (std::size_t i = 0; i < m.x0.size(); ++i) {
        s.vertices.push_back(swept_box(m, std::array<int, 1>{static_cast<int>(i)}, r));
    }
    for (const Triangle& t : m.triangles) {
        s.triangles.push_back(swept_box(m, t, r));
    }
    for (const Edge& e : m.edges) {
        s.edges.push_back(swept_box(m, e, r));
    }
    return s;
}

void check_inflation(double inflation)
{
    if (!(inflation >= 0.0) || !std::isfinite(inflation)) {
        throw UsageError("inflation must be finite and non-negative");
    }
}

void sort_candidates(std::vector<ContactCandidate>& c)
{
    std::sort(c.begin(), c.end(), [](const ContactCandidate& x, const ContactCandidate& y) {
        return std::tie(x.kind, x.a, x.b) < std::tie(y.kind, y.a, y.b);
    });
}

}  // namespace

std::vector<ContactCandidate> broad_phase(const TriMeshPair& mesh, double inflation)
{
    mesh.validate();
    check_inflation(inflation);
    const SweptBoxes boxes = swept_boxes(mesh, inflation);

    double diag_sum = 0.0;
    std::size_t count = 0;
    Aabb scene;
    for (const auto* list : {&boxes.vertices, &boxes.triangles, &boxes.edges}) {
        for (const Aabb& b : *list) {
            diag_sum += b.diagonal();
            ++count;
            scene.add(b.lo);
            scene.add(b.hi);
        }
    }
    std::vector<ContactCandidate> out;
    if (count == 0) {
        return out;
    }
    double cell = diag_sum / static_cast<double>(count);
    if (!(cell > 0.0) || !std::isfinite(cell)) {
        cell = 1.0;
    }

    std::vector<int> hits;
    Grid tri_grid(cell, scene.lo);
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        tri_grid.insert(static_cast<int>(i), boxes.triangles[i]);
    }
    for (std::size_t v = 0; v < mesh.x0.size(); ++v) {
        tri_grid.query(boxes.vertices[v], hits);
        for (int t : hits) {
            const Triangle& tri = mesh.triangles[static_cast<std::size_t>(t)];
            if (shares_vertex(std::array<int, 1>{static_cast<int>(v)}, tri) ||
                !boxes.vertices[v].overlaps(boxes.triangles[static_cast<std::size_t>(t)])) {
                continue;
            }
            out.push_back(make_vf(mesh, static_cast<int>(v), t));
        }
    }

    Grid edge_grid(cell, scene.lo);
    for (std::size_t i = 0; i < mesh.edges.size(); ++i) {
        edge_grid.insert(static_cast<int>(i), boxes.edges[i]);
    }
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        edge_grid.query(boxes.edges[e], hits);
        for (int f : hits) {
            if (f <= static_cast<int>(e) || shares_vertex(mesh.edges[e], mesh.edges[static_cast<std::size_t>(f)]) ||
                !boxes.edges[e].overlaps(boxes.edges[static_cast<std::size_t>(f)])) {
                continue;
            }
            out.push_back(make_ee(mesh, static_cast<int>(e), f));
        }
    }
    sort_candidates(out);
    return out;
}

std::vector<ContactCandidate> all_pairs(const TriMeshPair& mesh, double inflation)
{
    mesh.validate();
    check_inflation(inflation);
    const SweptBoxes boxes = swept_boxes(mesh, inflation);
    std::vector<ContactCandidate> out;
    for (std::size_t v = 0; v < mesh.x0.size(); ++v) {
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            if (!shares_vertex(std::array<int, 1>{static_cast<int>(v)}, mesh.triangles[t]) &&
                boxes.vertices[v].overlaps(boxes.triangles[t])) {
                out.push_back(make_vf(mesh, static_cast<int>(v), static_cast<int>(t)));
            }
        }
    }
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        for (std::size_t f = e + 1; f < mesh.edges.size(); ++f) {
            if (!shares_vertex(mesh.edges[e], mesh.edges[f]) && boxes.edges[e].overlaps(boxes.edges[f])) {
                out.push_back(make_ee(mesh, static_cast<int>(e), static_cast<int>(f)));
            }
        }
    }
    sort_candidates(out);
    return out;
}

// ---------------------------------------------------------------------------
// Active set

namespace {

struct SceneFilters {
    FilterEps vf;
    FilterEps ee;
    const FilterEps& operator[](QueryKind k) const { return k == QueryKind::VertexFace ? vf : ee; }
};

SceneFilters scene_filters(const Gamma& gamma, double separation)
{
    return {compute_filters(QueryKind::VertexFace, gamma, separation),
            compute_filters(QueryKind::EdgeEdge, gamma, separation)};
}

}  // namespace

std::vector<ActiveContact> construct_active_set(const TriMeshPair& mesh, const ActiveSetConfig& cfg)
{
    SolverConfig solver_cfg;
    solver_cfg.delta = cfg.delta;
    solver_cfg.max_checks = cfg.max_checks;
    solver_cfg.separation = cfg.separation;
    solver_cfg.validate();

    const SceneFilters filters = scene_filters(mesh.gamma(), cfg.separation);
    std::vector<ActiveContact> out;
    for (ContactCandidate& c : broad_phase(mesh, cfg.separation + cfg.delta)) {
        solver_cfg.filters = filters[c.kind];
        const CCDResult r = solve(c.query, solver_cfg);
        if (r.toi) {
            out.push_back({std::move(c), *r.toi, r.witness, r.achieved_tol});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distances

namespace {

double norm(const Vec3& v)
{
    return std::sqrt(dot(v, v));
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return norm(p - a);
    }
    const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + s * ab));
}

}  // namespace

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 n = cross(ab, ac);
    const double n2 = dot(n, n);
    const double edge_min = std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                                      point_segment_distance(p, c, a)});
    if (!(n2 > 0.0)) {
        return edge_min;
    }
    // Barycentric coordinates of the projection onto the plane.
    const Vec3 ap = p - a;
    const double v = dot(cross(ap, ac), n) / n2;
    const double w = dot(cross(ab, ap), n) / n2;
    if (v >= 0.0 && w >= 0.0 && v + w <= 1.0) {
        return std::min(std::abs(dot(ap, n)) / std::sqrt(n2), edge_min);
    }
    return edge_min;
}

double segment_segment_distance(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2)
{
    const Vec3 d1 = p2 - p1;
    const Vec3 d2 = q2 - q1;
    const Vec3 r = p1 - q1;
    const double a = dot(d1, d1);
    const double e = dot(d2, d2);
    const double f = dot(d2, r);
    if (a == 0.0 && e == 0.0) {
        return norm(r);
    }
    if (a == 0.0) {
        return point_segment_distance(p1, q1, q2);
    }
    if (e == 0.0) {
        return point_segment_distance(q1, p1, p2);
    }
    const double c = dot(d1, r);
    const double b = dot(d1, d2);
    const double denom = a * e - b * b;
    double s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
    double t = (b * s + f) / e;
    if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
    }
    const double closest = norm((p1 + s * d1) - (q1 + t * d2));
    // Endpoint distances guard against cancellation in near-parallel cases.
    return std::min({closest, point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                     point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

double primitive_distance_lb(const ContactCandidate& c)
{
    const auto& s = c.query.start();
    const double euclid = c.kind == QueryKind::VertexFace ? point_triangle_distance(s[0], s[1], s[2], s[3])
                                                          : segment_segment_distance(s[0], s[1], s[2], s[3]);
    if (!(euclid > 0.0)) {
        return 0.0;
    }
    return std::max(0.0, std::nextafter(euclid / std::sqrt(3.0), 0.0));
}

// ---------------------------------------------------------------------------
// Line search

namespace {

// Halves p until the separation p * d leaves room for the tolerances.
double validate_p(double p, double distance, double delta, double eps, double rho)
{
    if (!(distance > 0.0)) {
        throw InfeasibleStepError("primitives already touch; no separation can be validated");
    }
    const double bound = (distance - delta - eps - rho) / distance;
    while (!(p < bound)) {
        p *= 0.5;
        if (p == 0.0) {
            throw InfeasibleStepError("p underflowed: distance " + std::to_string(distance) +
                                      " does not exceed delta + eps + rho; reduce delta");
        }
    }
    return p;
}

}  // namespace

LineSearchResult line_search(const TriMeshPair& mesh, std::span<const Vec3> dx, double p, double delta,
                             std::int64_t max_checks, const EnergyDecreases& energy_decreases,
                             const LineSearchOptions& opts)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw UsageError("line search: p must lie in (0, 1)");
    }
    if (dx.size() != mesh.x0.size()) {
        throw UsageError("line search: dx needs one entry per vertex");
    }
    if (!std::all_of(dx.begin(), dx.end(), [](const Vec3& v) { return v.is_finite(); })) {
        throw UsageError("line search: dx must be finite");
    }
    if (opts.separation_cap && !(*opts.separation_cap > 0.0)) {
        throw UsageError("line search: separation cap must be positive");
    }
    if (!(opts.rho >= 0.0) || !(opts.alpha_min >= 0.0) || opts.max_rounds < 1) {
        throw UsageError("line search: invalid options");
    }
    SolverConfig probe;
    probe.delta = delta;
    probe.max_checks = max_checks;
    probe.validate();

    TriMeshPair step = mesh;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        step.x1[i] = mesh.x0[i] + dx[i];
    }
    step.validate();
    const Gamma gamma = step.gamma();
    // Any positive separation selects the separation-adjusted constants.
    const SceneFilters filters = scene_filters(gamma, std::numeric_limits<double>::min());
    const double max_separation = 0.5 * std::min({gamma[0], gamma[1], gamma[2]});
    const double inflation = opts.inflation > 0.0 ? opts.inflation : delta;

    LineSearchResult result;
    for (ContactCandidate& c : broad_phase(step, inflation)) {
        const double lb = primitive_distance_lb(c);
        const double eps = filters[c.kind].max_eps();
        result.pairs.push_back({std::move(c), lb, 0.0, 0.0, eps, 0.0, std::nullopt});
    }

    double round_delta = delta;
    double alpha = 1.0;
    for (int round = 1;; ++round) {
        result.rounds = round;
        for (ValidatedPair& vp : result.pairs) {
            vp.p = validate_p(round == 1 ? p : std::min(p, vp.p), vp.distance_lb, round_delta, vp.eps, opts.rho);
            vp.separation = std::min(vp.p * vp.distance_lb, max_separation);
            if (opts.separation_cap) {
                vp.separation = std::min(vp.separation, *opts.separation_cap);
            }
        }

        alpha = 1.0;
        double achieved = round_delta;
        for (ValidatedPair& vp : result.pairs) {
            vp.toi.reset();
            vp.achieved_delta = round_delta;
            if (alpha == 0.0) {
                continue;
            }
            SolverConfig cfg;
            cfg.delta = round_delta;
            cfg.max_checks = max_checks;
            cfg.separation = vp.separation;
            cfg.t_max = alpha;
            cfg.filters = filters[vp.candidate.kind];
            const CCDResult r = solve(vp.candidate.query, cfg);
            if (r.toi) {
                vp.toi = r.toi;
                vp.achieved_delta = std::max(round_delta, r.codomain_width);
                alpha = std::min(alpha, *r.toi);
            }
            achieved = std::max(achieved, vp.achieved_delta);
        }

        const bool valid = std::all_of(result.pairs.begin(), result.pairs.end(), [&](const ValidatedPair& vp) {
            return vp.p < (vp.distance_lb - achieved - vp.eps - opts.rho) / vp.distance_lb;
        });
        if (valid) {
            break;
        }
        if (round >= opts.max_rounds) {
            throw InfeasibleStepError("line search: separation could not be validated after " +
                                      std::to_string(round) + " rounds");
        }
        round_delta = achieved;
    }

    result.ccd_alpha = alpha;
    while (alpha > opts.alpha_min) {
        if (!energy_decreases || energy_decreases(alpha)) {
            break;
        }
        alpha *= 0.5;
    }
    result.alpha = alpha;
    return result;
}

double line_search_step(const TriMeshPair& mesh, std::span<const Vec3> dx, double p, double delta,
                        std::int64_t max_checks, const EnergyDecreases& energy_decreases,
                        const LineSearchOptions& opts)
{
    return line_search(mesh, dx, p, delta, max_checks, energy_decreases, opts).alpha;
}

// ---------------------------------------------------------------------------
// OBJ

ObjMesh parse_obj(std::istream& in)
{
    ObjMesh mesh;
    std::string line;
    std::size_t row = 0;
    for (; std::getline(in, line); ++row) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) {
            continue;
        }
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z) || !p.is_finite()) {
                throw ParseError(row, "malformed vertex");
            }
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                int idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stoi(head, &used);
                    if (used != head.size()) {
                        throw std::invalid_argument("trailing characters");
                    }
                } catch (const std::exception&) {
                    throw ParseError(row, "malformed face index '" + tok + "'");
                }
                const int n = static_cast<int>(mesh.vertices.size());
                const int zero_based = idx > 0 ? idx - 1 : n + idx;
                if (idx == 0 || zero_based < 0 || zero_based >= n) {
                    throw ParseError(row, "face index out of range");
                }
                poly.push_back(zero_based);
            }
            if (poly.size() < 3) {
                throw ParseError(row, "face needs at least three vertices");
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    return mesh;
}

ObjMesh load_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return parse_obj(in);
}

}  // namespace ccd::scene
