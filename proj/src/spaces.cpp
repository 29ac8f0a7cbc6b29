#include "cdh/spaces.hpp"

#include <algorithm>
#include <sstream>

#include "cdh/errors.hpp"
#include "cdh/pl_homeo.hpp"

namespace cdh {

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::CantorBits: return "CantorBits";
    case FactorKind::BaireInts: return "BaireInts";
    case FactorKind::Circle: return "Circle";
    case FactorKind::Line: return "Line";
    case FactorKind::Disc: return "Disc";
    case FactorKind::Ball: return "Ball";
  }
  return "?";
}

FactorKind parse_factor_kind(const std::string& text) {
  for (auto k : {FactorKind::CantorBits, FactorKind::BaireInts, FactorKind::Circle, FactorKind::Line,
                 FactorKind::Disc, FactorKind::Ball}) {
    if (to_string(k) == text) return k;
  }
  throw ParseError("unknown factor kind: " + text);
}

FactorSpace::FactorSpace(FactorKind kind, int dimension, double tolerance)
    : kind_(kind), dimension_(dimension), tolerance_(tolerance) {
  if (!is_exact() && dimension < 1) throw PreconditionFailure("disc and ball need a dimension >= 1");
  if (is_exact()) dimension_ = 0;
}

Scalar FactorSpace::diameter() const {
  switch (kind_) {
    case FactorKind::Circle: return ratio(1, 2);
    case FactorKind::Disc:
    case FactorKind::Ball: return 2;
    default: return 1;
  }
}

bool FactorSpace::has_group() const {
  return kind_ == FactorKind::CantorBits || kind_ == FactorKind::Circle || kind_ == FactorKind::Line;
}

FactorPoint FactorSpace::origin() const {
  if (is_sequence_space()) return Sequence();
  if (is_exact()) return Scalar(0);
  return Eigen::VectorXd::Zero(dimension_).eval();
}

FactorPoint FactorSpace::group_identity() const {
  if (!has_group()) throw UnsupportedFactor(to_string(kind_) + " has no group structure");
  return origin();
}

FactorPoint FactorSpace::group_product(const FactorPoint& a, const FactorPoint& b) const {
  check_point(a);
  check_point(b);
  switch (kind_) {
    case FactorKind::CantorBits: {
      const auto& x = as_sequence(a);
      const auto& y = as_sequence(b);
      const std::size_t n = std::max(x.support(), y.support());
      Word w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = x[i] ^ y[i];
      return Sequence(std::move(w));
    }
    case FactorKind::Circle: return frac(as_scalar(a) + as_scalar(b));
    case FactorKind::Line: return Scalar(as_scalar(a) + as_scalar(b));
    default: throw UnsupportedFactor(to_string(kind_) + " has no group structure");
  }
}

FactorPoint FactorSpace::group_inverse(const FactorPoint& a) const {
  check_point(a);
  switch (kind_) {
    case FactorKind::CantorBits: return a;
    case FactorKind::Circle: return frac(-as_scalar(a));
    case FactorKind::Line: return Scalar(-as_scalar(a));
    default: throw UnsupportedFactor(to_string(kind_) + " has no group structure");
  }
}

void FactorSpace::check_point(const FactorPoint& p) const {
  if (is_sequence_space()) {
    const auto* s = std::get_if<Sequence>(&p);
    if (!s) throw KindMismatch("expected a sequence point for " + to_string(kind_));
    for (std::size_t i = 0; i < s->support(); ++i) {
      const Letter a = (*s)[i];
      if (a < 0 || (kind_ == FactorKind::CantorBits && a > 1)) {
        throw KindMismatch("letter outside the alphabet of " + to_string(kind_));
      }
    }
    return;
  }
  if (is_exact()) {
    const auto* q = std::get_if<Scalar>(&p);
    if (!q) throw KindMismatch("expected a rational point for " + to_string(kind_));
    if (kind_ == FactorKind::Circle && (*q < 0 || *q >= 1)) {
      throw KindMismatch("circle points are represented in [0, 1)");
    }
    return;
  }
  const auto* v = std::get_if<Eigen::VectorXd>(&p);
  if (!v || v->size() != dimension_) throw KindMismatch("expected a vector of dimension " + std::to_string(dimension_));
  const double n = v->norm();
  if (n > 1 + tolerance_ || (kind_ == FactorKind::Ball && n >= 1)) {
    throw KindMismatch("point outside the " + to_string(kind_));
  }
}

Scalar FactorSpace::distance(const FactorPoint& a, const FactorPoint& b) const {
  check_point(a);
  check_point(b);
  switch (kind_) {
    case FactorKind::CantorBits:
    case FactorKind::BaireInts: return sequence_distance(as_sequence(a), as_sequence(b));
    case FactorKind::Circle: return circle_distance(as_scalar(a), as_scalar(b));
    case FactorKind::Line: return line_distance(as_scalar(a), as_scalar(b));
    default: return Scalar((as_vector(a) - as_vector(b)).norm());
  }
}

bool FactorSpace::same_point(const FactorPoint& a, const FactorPoint& b) const {
  if (is_sequence_space()) return as_sequence(a) == as_sequence(b);
  if (is_exact()) return as_scalar(a) == as_scalar(b);
  return (as_vector(a) - as_vector(b)).norm() <= tolerance_;
}

std::string point_to_string(const FactorPoint& p) {
  if (const auto* s = std::get_if<Sequence>(&p)) {
    bool binary = true;
    const Word w = s->letters();
    for (Letter a : w) binary = binary && (a == 0 || a == 1);
    return binary ? "b:" + word_to_string(w, true) : "i:" + word_to_string(w, false);
  }
  if (const auto* q = std::get_if<Scalar>(&p)) return to_string(*q);
  std::ostringstream os;
  os.precision(17);
  const auto& v = std::get<Eigen::VectorXd>(p);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

const Sequence& as_sequence(const FactorPoint& p) {
  if (const auto* s = std::get_if<Sequence>(&p)) return *s;
  throw KindMismatch("point is not a sequence");
}

const Scalar& as_scalar(const FactorPoint& p) {
  if (const auto* s = std::get_if<Scalar>(&p)) return *s;
  throw KindMismatch("point is not a rational");
}

const Eigen::VectorXd& as_vector(const FactorPoint& p) {
  if (const auto* s = std::get_if<Eigen::VectorXd>(&p)) return *s;
  throw KindMismatch("point is not a vector");
}

}  // namespace cdh
