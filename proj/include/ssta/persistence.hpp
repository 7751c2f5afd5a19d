#pragma once

#include <Eigen/Dense>

#include "ssta/grid.hpp"

namespace ssta {

// The challenge baseline: the last observed SSTA row is the forecast for
// any horizon; the offset argument is accepted for interface parity and
// ignored.
inline Eigen::VectorXd persistence_forecast(const Block& block, int /*offset*/ = 3) {
    const Eigen::MatrixXd& w = block.window(Variable::SSTA);
    if (w.rows() < 1) throw ShapeError("persistence needs at least one SSTA row");
    return w.row(w.rows() - 1).transpose();
}

}  // namespace ssta
