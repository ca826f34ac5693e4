#pragma once

#include "graspkit/geometry.hpp"

namespace graspkit::oracle {

// Brute-force references used by the test suites and the self-test. They
// share no code path with the polygon-clipping implementation.

/// Pixel-center inclusion test in the rectangle's own frame.
bool covers(const GraspRect& r, double px, double py);

/// IoU by counting samples of a grid x grid lattice over the joint bounding
/// box of both rectangles.
double rasterized_iou(const GraspRect& a, const GraspRect& b, int grid = 512);

/// Area of a rectangle counted on the same lattice (diagnostic).
double rasterized_area(const GraspRect& r, int grid = 512);

}  // namespace graspkit::oracle
