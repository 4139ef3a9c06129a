#pragma once

#include <span>
#include <vector>

namespace bethe {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Counter-clockwise hull without collinear points (monotone chain). Fewer
/// than three distinct points come back as-is, deduplicated.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Euclidean distance from q to the convex hull of `points`; 0 when inside.
/// Throws InputError for an empty set.
double distance_to_hull(std::span<const Point2> points, Point2 q);

}  // namespace bethe
