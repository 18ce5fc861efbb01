#pragma once

#include <functional>

#include <Eigen/Dense>

namespace nlcvp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points live in the plane; one-dimensional problems use the first
/// coordinate and keep the second at zero.
using Point = Eigen::Vector2d;

inline Point point1d(double x) { return Point(x, 0.0); }

/// Scalar data on the real line (right-hand sides, exterior data, weights).
using Field = std::function<double(double)>;

}  // namespace nlcvp
