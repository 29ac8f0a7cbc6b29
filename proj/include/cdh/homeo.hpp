#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cdh/cylinder_homeo.hpp"
#include "cdh/float_homeo.hpp"
#include "cdh/pl_homeo.hpp"
#include "cdh/spaces.hpp"

namespace cdh {

/// A displacement or distance value. Exact kinds give the true supremum;
/// float kinds give a sampled estimate with certified == false.
struct Bound {
  Scalar value;
  bool certified = true;
};

/// A homeomorphism of one factor.
class Homeo {
 public:
  using Rep = std::variant<CylinderHomeo, PLHomeo, FloatHomeo>;

  Homeo(CylinderHomeo h) : rep_(std::move(h)) {}
  Homeo(PLHomeo h) : rep_(std::move(h)) {}
  Homeo(FloatHomeo h) : rep_(std::move(h)) {}

  static Homeo identity(const FactorSpace& space);

  const Rep& rep() const { return rep_; }
  bool exact() const { return !std::holds_alternative<FloatHomeo>(rep_); }
  const CylinderHomeo& cylinder() const;
  const PLHomeo& pl() const;
  const FloatHomeo& floating() const;

  /// Throws KindMismatch when the point does not match the representation.
  FactorPoint apply(const FactorPoint& x) const;
  Homeo inverse() const;
  Bound sup_displacement() const;
  bool is_identity() const;

  /// Description of the concrete representation, e.g. "cylinder".
  std::string family() const;

 private:
  Rep rep_;
};

/// outer after inner. Throws KindMismatch on different representations.
Homeo compose(const Homeo& outer, const Homeo& inner);

/// sup over x of d(a(x), b(x)); sampled for float maps.
Bound sup_distance(const Homeo& a, const Homeo& b);

/// Checks that the map is compatible with the factor (alphabet, domain,
/// dimension); throws KindMismatch otherwise.
void check_homeo(const FactorSpace& space, const Homeo& h);

using FiniteBijection = std::vector<std::pair<FactorPoint, FactorPoint>>;

/// A homeomorphism extending the finite bijection exactly. Always succeeds on
/// the sequence kinds. On the line sigma must be increasing and on the circle
/// it must preserve or reverse the cyclic order; otherwise OrderViolation.
Homeo realize_finite_bijection(const FactorSpace& space, const FiniteBijection& sigma);

/// A homeomorphism sending center to target, supported in the open ball
/// B(center, delta), with displacement below delta.
Homeo small_ball_transporter(const FactorSpace& space, const FactorPoint& center,
                             const FactorPoint& target, const Scalar& delta);

/// Smallest L with 2^-L < r: the open ball of radius r in a sequence space is
/// the cylinder of length L around its center.
std::size_t ball_cylinder_length(const Scalar& r);

}  // namespace cdh
