#pragma once

#include <array>

#include "grid.hpp"

namespace fkstencil {

/// Bilinear interpolation stencil over the four corners of one cell, ordered
/// (i,j), (i+1,j), (i,j+1), (i+1,j+1). Weights are products of local
/// coordinates, hence nonnegative and summing to one.
struct Stencil {
    std::array<NodeIndex, 4> nodes;
    std::array<double, 4> weights{};

    template <class NodalValue>
    double apply(NodalValue&& value) const
    {
        double acc = 0.0;
        for (int m = 0; m < 4; ++m)
            acc += weights[m] * value(nodes[m]);
        return acc;
    }
};

inline Stencil interpolation_stencil(const Grid2D& g, Point p)
{
    const CellLocation loc = locate_cell(g, p);
    const int i = loc.cell.i;
    const int j = loc.cell.j;
    const double u = loc.u;
    const double v = loc.v;
    Stencil st;
    st.nodes = {NodeIndex{i, j}, NodeIndex{i + 1, j}, NodeIndex{i, j + 1}, NodeIndex{i + 1, j + 1}};
    st.weights = {(1.0 - u) * (1.0 - v), u * (1.0 - v), (1.0 - u) * v, u * v};
    return st;
}

} // namespace fkstencil
