#include <doctest.h>

#include <cmath>

#include "bethe/error.hpp"
#include "bethe/hull.hpp"

using namespace bethe;

TEST_SUITE("hull") {

TEST_CASE("square with interior and collinear points") {
  std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}, {0, 0}};
  auto h = convex_hull(pts);
  CHECK(h.size() == 4);
  double area = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Point2& a = h[i];
    const Point2& b = h[(i + 1) % h.size()];
    area += a.x * b.y - b.x * a.y;
  }
  CHECK(area / 2 == doctest::Approx(1.0));  // counter-clockwise
}

TEST_CASE("distances") {
  std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(distance_to_hull(sq, {0.5, 0.5}) == 0.0);
  CHECK(distance_to_hull(sq, {1.0, 0.5}) == 0.0);
  CHECK(distance_to_hull(sq, {2.0, 0.5}) == doctest::Approx(1.0));
  CHECK(distance_to_hull(sq, {2.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));

  std::vector<Point2> seg{{0, 0}, {2, 0}};
  CHECK(distance_to_hull(seg, {1, 0}) == doctest::Approx(0.0));
  CHECK(distance_to_hull(seg, {1, 0.5}) == doctest::Approx(0.5));
  CHECK(distance_to_hull(seg, {3, 0}) == doctest::Approx(1.0));

  std::vector<Point2> one{{1, 1}};
  CHECK(distance_to_hull(one, {1, 2}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(distance_to_hull(std::vector<Point2>{}, {0, 0}), InputError);
}

}
