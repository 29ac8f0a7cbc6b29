#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdh/scalar.hpp"

namespace cdh {

struct Knot {
  Scalar x;
  Scalar y;
  friend bool operator==(const Knot&, const Knot&) = default;
};

/// Piecewise linear homeomorphism with rational breakpoints.
///
/// Line: knots strictly increasing in both coordinates, first and last knots
/// on the diagonal, identity outside [first, last]. No knots means identity.
///
/// Circle: a lift F of the map with F(x + 1) = F(x) + orientation. Knot
/// abscissae lie in [0, 1); the last segment wraps to (x_0 + 1, y_0 +
/// orientation). At least one knot.
class PLHomeo {
 public:
  enum class Domain { Line, Circle };

  static PLHomeo identity(Domain domain);
  static PLHomeo line(std::vector<Knot> knots);
  static PLHomeo circle(std::vector<Knot> knots, int orientation);
  /// x -> x + shift on the circle.
  static PLHomeo rotation(const Scalar& shift);

  Domain domain() const { return domain_; }
  int orientation() const { return orientation_; }
  const std::vector<Knot>& knots() const { return knots_; }

  /// Line: h(x). Circle: h(x) reduced to [0, 1).
  Scalar apply(const Scalar& x) const;
  /// Circle lift at any real x; equal to apply on the line.
  Scalar lift(const Scalar& x) const;

  PLHomeo inverse() const;
  Scalar sup_displacement() const;
  bool is_identity() const;

  std::optional<std::string> validate() const;

  friend PLHomeo compose(const PLHomeo& outer, const PLHomeo& inner);
  friend bool operator==(const PLHomeo& a, const PLHomeo& b);

 private:
  PLHomeo(Domain domain, std::vector<Knot> knots, int orientation);
  void simplify();

  Domain domain_ = Domain::Line;
  std::vector<Knot> knots_;
  int orientation_ = 1;
};

PLHomeo compose(const PLHomeo& outer, const PLHomeo& inner);

/// sup over x of d(a(x), b(x)) in the domain metric, exact.
Scalar sup_distance(const PLHomeo& a, const PLHomeo& b);

/// Arc distance on R/Z.
Scalar circle_distance(const Scalar& a, const Scalar& b);
/// min(|a - b|, 1).
Scalar line_distance(const Scalar& a, const Scalar& b);

}  // namespace cdh
