#include "bethe/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bethe/error.hpp"

namespace bethe {

namespace {

double cross(Point2 o, Point2 a, Point2 b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double segment_distance(Point2 a, Point2 b, Point2 q) noexcept {
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((q.x - a.x) * dx + (q.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a.x + t * dx - q.x, a.y + t * dy - q.y);
}

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> points) {
  auto less = [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
  std::sort(points.begin(), points.end(), less);
  points.erase(std::unique(points.begin(), points.end(),
                           [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
               points.end());
  if (points.size() < 3) return points;
  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const Point2& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

double distance_to_hull(std::span<const Point2> points, Point2 q) {
  if (points.empty()) throw InputError("distance_to_hull: empty point set");
  std::vector<Point2> h = convex_hull({points.begin(), points.end()});
  if (h.size() == 1) return std::hypot(h[0].x - q.x, h[0].y - q.y);
  if (h.size() >= 3) {
    bool inside = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (cross(h[i], h[(i + 1) % h.size()], q) < 0.0) {
        inside = false;
        break;
      }
    }
    if (inside) return 0.0;
  }
  // All points collinear collapse to the two extremes, which is a segment.
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.size(); ++i) d = std::min(d, segment_distance(h[i], h[(i + 1) % h.size()], q));
  return d;
}

}  // namespace bethe
