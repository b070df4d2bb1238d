#pragma once

#include "ccd/core.hpp"

namespace ccd::fixtures {

inline const Query::Points kUnitTriangleVF0{{{0.3, 0.3, 1.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};

/// Vertex falling straight through the unit triangle; F = (0.3-u, 0.3-v, 1-2t).
inline Query vertical_vf()
{
    return Query::vertex_face(kUnitTriangleVF0, {{{0.3, 0.3, -1.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}});
}

/// Stationary vertex 10 units above the stationary unit triangle; F = (-u, -v, 10).
inline Query offset_vf()
{
    const Query::Points pts{{{0.0, 0.0, 10.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
    return Query::vertex_face(pts, pts);
}

/// Fixed x-axis edge crossed by a y-axis edge descending from z=1 to z=-1;
/// F = (-1+2u, 1-2v, 2t-1).
inline Query crossing_ee()
{
    return Query::edge_edge({{{-1, 0, 0}, {1, 0, 0}, {0, -1, 1}, {0, 1, 1}}},
                            {{{-1, 0, 0}, {1, 0, 0}, {0, -1, -1}, {0, 1, -1}}});
}

/// Parallel stationary edges 5 apart in z.
inline Query parallel_ee()
{
    const Query::Points pts{{{0, 0, 5}, {1, 0, 5}, {0, 0, 0}, {1, 0, 0}}};
    return Query::edge_edge(pts, pts);
}

/// Stationary point inside a triangle that flips over it (degenerate bilinear side face).
inline Query hourglass_vf()
{
    return Query::vertex_face({{{0.1, 0.1, 0.1}, {0, 0, 1}, {1, 0, 1}, {0, 1, 1}}},
                              {{{0.1, 0.1, 0.1}, {0, 0, 0}, {0, 1, 0}, {1, 0, 0}}});
}

/// Vertex-face query whose coplanarity cubic is -72 t^3 + 120 t^2 - 44 t + 3.
inline Query inflection_vf()
{
    return Query::vertex_face({{{1, 1, 0}, {0, 0, 5}, {2, 0, 2}, {0, 1, 0}}},
                              {{{1, 1, 0}, {0, 0, -1}, {0, 0, -2}, {0, 7, 0}}});
}

/// Everything in the plane z = 1: a fixed point swept over by a translating triangle.
inline Query coplanar_vf()
{
    return Query::vertex_face({{{1, 0.5, 1}, {0, 0.57, 1}, {1, 0.57, 1}, {1, 1.57, 1}}},
                              {{{1, 0.5, 1}, {0, 0.28, 1}, {1, 0.28, 1}, {1, 1.28, 1}}});
}

}  // namespace ccd::fixtures
