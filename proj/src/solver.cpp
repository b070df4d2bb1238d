#include "ccd/solver.hpp"

#include <cmath>
#include <algorithm>
#include <vector>

#include "ccd/errors.hpp"

namespace ccd {

void SolverConfig::validate() const
{
    if (!(delta > 0.0)) {
        throw UsageError("delta must be positive");
    }
    if (max_checks < 1) {
        throw UsageError("max_checks must be at least 1");
    }
    if (!(separation >= 0.0) || !std::isfinite(separation)) {
        throw UsageError("separation must be finite and non-negative");
    }
    if (!(t_max > 0.0 && t_max <= 1.0)) {
        throw UsageError("t_max must lie in (0, 1]");
    }
}

bool queue_order(const DomainBox& a, const DomainBox& b)
{
    if (a.level != b.level) {
        return a.level < b.level;
    }
    return a.t.lo < b.t.lo;
}

SplitResult split(const DomainBox& box, const std::array<double, 3>& kappa, QueryKind kind)
{
    const std::array<double, 3> c{box.t.width() * kappa[0], box.u.width() * kappa[1], box.v.width() * kappa[2]};
    const double cmax = std::max({c[0], c[1], c[2]});
    if (!(cmax > 0.0)) {
        throw DegenerateBoxError("box cannot be refined: all width * kappa products are zero");
    }
    const int dim = c[0] == cmax ? 0 : (c[1] == cmax ? 1 : 2);

    SplitResult r;
    r.dimension = dim;
    r.first = box;
    r.second = box;
    const double mid = box[dim].mid();
    r.first[dim].hi = mid;
    r.second[dim].lo = mid;
    r.first.level = box.level + 1;
    r.second.level = box.level + 1;
    if (kind == QueryKind::VertexFace) {
        r.first_alive = r.first.intersects_prism();
        r.second_alive = r.second.intersects_prism();
    }
    return r;
}

namespace {

struct BoxCheck {
    BoxClass cls = BoxClass::Disjoint;
    double width = 0.0;
};

BoxCheck check_box(const Query& q, const DomainBox& box, const FilterEps& eps, double separation)
{
    BoxCheck out;
    bool contained = true;
    for (int axis = 0; axis < 3; ++axis) {
        const CornerValues values = corner_values(q, box, axis);
        const BoxClass c = classify_axis(values, eps.eps[axis], separation);
        if (c == BoxClass::Disjoint) {
            out.cls = BoxClass::Disjoint;
            return out;
        }
        contained = contained && c == BoxClass::Contained;
        double lo = values[0];
        double hi = values[0];
        for (double x : values) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        out.width = std::max(out.width, hi - lo);
    }
    out.cls = contained ? BoxClass::Contained : BoxClass::Intersects;
    return out;
}

}  // namespace

CCDResult solve(const Query& q, const SolverConfig& cfg)
{
    cfg.validate();
    const FilterEps eps = cfg.filters ? *cfg.filters : compute_filters(q.kind(), compute_gamma(q), cfg.separation);
    if (cfg.separation > 0.0 && !eps.separation_adjusted) {
        throw UsageError("solve: separation > 0 requires separation-adjusted filters");
    }
    const std::array<double, 3> kappa = kappas(q);

    // Every push targets the level after the one being processed, so the
    // (level, t.lo, insertion) order reduces to one vector per level, stably
    // sorted by t.lo when it becomes current.
    std::vector<DomainBox> current{DomainBox::unit(cfg.t_max)};
    std::vector<DomainBox> next;
    std::size_t cursor = 0;
    auto queue_empty = [&] { return cursor == current.size() && next.empty(); };

    CCDResult result;
    int previous_level = -1;
    DomainBox first_box;  // first colliding box of the most recent colliding level
    double first_width = 0.0;
    bool have_first = false;

    auto finish = [&](bool early) {
        result.toi = first_box.t.lo;
        result.witness = first_box;
        result.achieved_tol = first_box.t.width();
        result.codomain_width = first_width;
        result.early_terminated = early;
        return result;
    };

    while (!queue_empty()) {
        if (cursor == current.size()) {
            std::stable_sort(next.begin(), next.end(),
                             [](const DomainBox& a, const DomainBox& b) { return a.t.lo < b.t.lo; });
            current.swap(next);
            next.clear();
            cursor = 0;
        }
        const DomainBox box = current[cursor++];
        const BoxCheck check = check_box(q, box, eps, cfg.separation);
        ++result.checks;

        if (check.cls == BoxClass::Disjoint) {
            if (result.checks >= cfg.max_checks && have_first && !queue_empty()) {
                return finish(true);
            }
            continue;
        }

        const bool first_in_level = box.level != previous_level;
        if (first_in_level) {
            first_box = box;
            first_width = check.width;
            have_first = true;
        }
        if (result.checks >= cfg.max_checks) {
            return finish(true);
        }

        bool refine = !(check.width < cfg.delta || check.cls == BoxClass::Contained);
        SplitResult children;
        if (refine) {
            try {
                children = split(box, kappa, q.kind());
            } catch (const DegenerateBoxError&) {
                refine = false;  // F is constant over the box
            }
        }

        if (!refine) {
            if (first_in_level) {
                return finish(false);
            }
            // An earlier, larger colliding box exists on this level. It may
            // turn out root-free, so this box moves on to the next level
            // instead of being dropped.
            DomainBox carried = box;
            carried.level = box.level + 1;
            next.push_back(carried);
        } else {
            if (children.first_alive) {
                next.push_back(children.first);
            }
            if (children.second_alive) {
                next.push_back(children.second);
            }
        }
        previous_level = box.level;
    }
    return result;
}

}  // namespace ccd
