#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "ccd/core.hpp"
#include "ccd/inclusion.hpp"

namespace ccd {

struct SolverConfig {
    /// Co-domain tolerance: a colliding box narrower than this is accepted.
    double delta = 1e-6;
    /// Maximum number of box checks before returning early.
    std::int64_t max_checks = 1'000'000;
    /// Minimum separation d, measured in the infinity norm.
    double separation = 0.0;
    /// Only [0, t_max] of the trajectory is searched.
    double t_max = 1.0;
    /// Rounding bounds; computed from the query's own points when empty.
    std::optional<FilterEps> filters;

    /// Throws UsageError when a field is out of range.
    void validate() const;
};

struct CCDResult {
    /// Conservative time of impact, or empty when no contact exists.
    std::optional<double> toi;
    /// Domain box whose t-interval starts at toi.
    DomainBox witness;
    /// Width of the witness t-interval.
    double achieved_tol = 0.0;
    /// Width of the co-domain box of the witness.
    double codomain_width = 0.0;
    std::int64_t checks = 0;
    bool early_terminated = false;

    bool collides() const { return toi.has_value(); }
};

/// Earliest conservative time of impact of a query.
///
/// Breadth-first bisection of [0, t_max] x [0,1]^2 ordered by (level, t):
/// boxes whose corner enclosure misses the filter cube are discarded, the
/// first colliding box of a level that is narrower than delta (or lies inside
/// the filter cube) ends the search, and after max_checks checks the first
/// colliding box of the current level is returned. The returned time never
/// exceeds a true contact time.
CCDResult solve(const Query& q, const SolverConfig& cfg = {});

struct SplitResult {
    DomainBox first;
    DomainBox second;
    bool first_alive = true;
    bool second_alive = true;
    /// 0 = t, 1 = u, 2 = v.
    int dimension = 0;
};

/// Bisects the dimension with the largest w(I_dim) * kappa_dim, preferring t
/// then u then v on ties. Vertex-face children outside the prism u + v <= 1
/// are reported dead. Throws DegenerateBoxError when every product is zero.
SplitResult split(const DomainBox& box, const std::array<double, 3>& kappa, QueryKind kind);

/// Strict weak order of the visiting queue: level first, then t.lo.
bool queue_order(const DomainBox& a, const DomainBox& b);

}  // namespace ccd
