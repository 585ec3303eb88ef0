#pragma once

#include <array>
#include <span>

namespace twoscale {

/// Barycentric quadrature point on a triangle; weights sum to one and are
/// scaled by the triangle area by the caller.
struct TriangleQuadPoint {
  std::array<double, 3> bary;
  double weight;
};

/// Gauss point on the unit interval; weights sum to one.
struct LineQuadPoint {
  double s;
  double weight;
};

/// Symmetric triangle rule exact for polynomials of the given total degree.
/// Supported degrees: 2, 4, 6.
std::span<const TriangleQuadPoint> triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1] with the given number of points (1..5).
std::span<const LineQuadPoint> line_rule(int points);

}  // namespace twoscale
