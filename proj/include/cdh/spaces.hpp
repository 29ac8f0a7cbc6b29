#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "cdh/scalar.hpp"
#include "cdh/sequence.hpp"

namespace cdh {

enum class FactorKind { CantorBits, BaireInts, Circle, Line, Disc, Ball };

std::string to_string(FactorKind kind);
FactorKind parse_factor_kind(const std::string& text);

/// A point of one factor: a sequence for the zero-dimensional kinds, a
/// rational for Circle (in [0, 1)) and Line, a vector for Disc and Ball.
using FactorPoint = std::variant<Sequence, Scalar, Eigen::VectorXd>;

/// One factor space with its standard metric.
///
/// CantorBits, BaireInts: 2^-(first difference). Circle: arc length on R/Z.
/// Line: min(|x - y|, 1). Disc(m) is the closed unit disc, Ball(m) the open
/// unit ball, both with the Euclidean metric; their diameter is 2 and
/// comparisons use `tolerance`.
class FactorSpace {
 public:
  explicit FactorSpace(FactorKind kind, int dimension = 0, double tolerance = 1e-9);

  static FactorSpace cantor() { return FactorSpace(FactorKind::CantorBits); }
  static FactorSpace baire() { return FactorSpace(FactorKind::BaireInts); }
  static FactorSpace circle() { return FactorSpace(FactorKind::Circle); }
  static FactorSpace line() { return FactorSpace(FactorKind::Line); }
  static FactorSpace disc(int m) { return FactorSpace(FactorKind::Disc, m); }
  static FactorSpace ball(int m) { return FactorSpace(FactorKind::Ball, m); }

  FactorKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double tolerance() const { return tolerance_; }

  bool is_exact() const { return kind_ != FactorKind::Disc && kind_ != FactorKind::Ball; }
  bool is_sequence_space() const {
    return kind_ == FactorKind::CantorBits || kind_ == FactorKind::BaireInts;
  }
  bool zero_dimensional() const { return is_sequence_space(); }
  /// Every non-empty open set is infinite.
  bool crowded() const { return true; }
  /// Alphabet size for sequence kinds, 0 meaning unbounded.
  int alphabet() const { return kind_ == FactorKind::CantorBits ? 2 : 0; }
  Scalar diameter() const;
  /// True only for Disc and Ball, whose diameter exceeds 1.
  bool diameter_exceeds_one() const { return !is_exact(); }

  bool has_group() const;
  FactorPoint group_identity() const;
  FactorPoint group_product(const FactorPoint& a, const FactorPoint& b) const;
  FactorPoint group_inverse(const FactorPoint& a) const;

  /// The default coordinate of a product point: zeros, 0, or the origin.
  FactorPoint origin() const;

  /// Throws KindMismatch if the point has the wrong representation or lies
  /// outside the space.
  void check_point(const FactorPoint& p) const;

  Scalar distance(const FactorPoint& a, const FactorPoint& b) const;
  /// Exact equality for exact kinds, within tolerance for float kinds.
  bool same_point(const FactorPoint& a, const FactorPoint& b) const;

  friend bool operator==(const FactorSpace& a, const FactorSpace& b) {
    return a.kind_ == b.kind_ && a.dimension_ == b.dimension_;
  }

 private:
  FactorKind kind_;
  int dimension_;
  double tolerance_;
};

std::string point_to_string(const FactorPoint& p);

const Sequence& as_sequence(const FactorPoint& p);
const Scalar& as_scalar(const FactorPoint& p);
const Eigen::VectorXd& as_vector(const FactorPoint& p);

}  // namespace cdh
