#include "cdh/pl_homeo.hpp"

#include <algorithm>

#include "cdh/errors.hpp"

namespace cdh {

namespace {

const Scalar kHalf(1, 2);

Scalar arc_norm(const Scalar& t) {
  const Scalar f = frac(t);
  return std::min(f, Scalar(1 - f));
}

// Sup of the arc norm along the segment between a and b.
Scalar arc_sup(const Scalar& a, const Scalar& b) {
  const Scalar& lo = std::min(a, b);
  const Scalar& hi = std::max(a, b);
  const Scalar k = floor_of(hi - kHalf);
  if (k + kHalf >= lo) return kHalf;
  return std::max(arc_norm(a), arc_norm(b));
}

Scalar interpolate(const Knot& a, const Knot& b, const Scalar& x) {
  if (x == a.x) return a.y;
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

bool collinear(const Knot& a, const Knot& b, const Knot& c) {
  return (b.y - a.y) * (c.x - b.x) == (c.y - b.y) * (b.x - a.x);
}

void sort_unique(std::vector<Scalar>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Scalar circle_distance(const Scalar& a, const Scalar& b) { return arc_norm(a - b); }

Scalar line_distance(const Scalar& a, const Scalar& b) {
  return std::min(abs_of(a - b), Scalar(1));
}

PLHomeo::PLHomeo(Domain domain, std::vector<Knot> knots, int orientation)
    : domain_(domain), knots_(std::move(knots)), orientation_(orientation) {}

PLHomeo PLHomeo::identity(Domain domain) {
  if (domain == Domain::Line) return PLHomeo(domain, {}, 1);
  return PLHomeo(domain, {Knot{0, 0}}, 1);
}

PLHomeo PLHomeo::line(std::vector<Knot> knots) {
  PLHomeo out(Domain::Line, std::move(knots), 1);
  if (auto err = out.validate()) throw PreconditionFailure("invalid line map: " + *err);
  out.simplify();
  return out;
}

PLHomeo PLHomeo::circle(std::vector<Knot> knots, int orientation) {
  std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.x < b.x; });
  PLHomeo out(Domain::Circle, std::move(knots), orientation);
  if (auto err = out.validate()) throw PreconditionFailure("invalid circle map: " + *err);
  out.simplify();
  return out;
}

PLHomeo PLHomeo::rotation(const Scalar& shift) {
  return PLHomeo(Domain::Circle, {Knot{0, shift}}, 1);
}

std::optional<std::string> PLHomeo::validate() const {
  const auto n = knots_.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (knots_[i].x <= knots_[i - 1].x) return "abscissae not strictly increasing";
    const Scalar step = knots_[i].y - knots_[i - 1].y;
    if (step * orientation_ <= 0) return "values not strictly monotone";
  }
  if (domain_ == Domain::Line) {
    if (n == 1) return "a single knot";
    if (n >= 2 && (knots_.front().x != knots_.front().y || knots_.back().x != knots_.back().y)) {
      return "end knots must be fixed";
    }
    return std::nullopt;
  }
  if (orientation_ != 1 && orientation_ != -1) return "orientation must be 1 or -1";
  if (n == 0) return "circle map needs a knot";
  if (knots_.front().x < 0 || knots_.back().x >= 1) return "abscissae outside [0, 1)";
  const Scalar wrap = knots_.front().y + orientation_ - knots_.back().y;
  if (wrap * orientation_ <= 0) return "wrap segment not monotone";
  return std::nullopt;
}

void PLHomeo::simplify() {
  if (domain_ == Domain::Line) {
    std::vector<Knot> kept;
    for (const auto& k : knots_) {
      while (kept.size() >= 2 && collinear(kept[kept.size() - 2], kept.back(), k)) kept.pop_back();
      kept.push_back(k);
    }
    auto on_diagonal = [](const Knot& k) { return k.x == k.y; };
    while (kept.size() >= 2 && on_diagonal(kept[0]) && on_diagonal(kept[1])) kept.erase(kept.begin());
    while (kept.size() >= 2 && on_diagonal(kept[kept.size() - 1]) && on_diagonal(kept[kept.size() - 2])) {
      kept.pop_back();
    }
    if (kept.size() < 2) kept.clear();
    knots_ = std::move(kept);
    return;
  }
  bool changed = true;
  while (changed && knots_.size() > 1) {
    changed = false;
    const auto n = knots_.size();
    for (std::size_t i = 0; i < n; ++i) {
      Knot prev = knots_[(i + n - 1) % n];
      Knot next = knots_[(i + 1) % n];
      if (i == 0) prev = Knot{prev.x - 1, prev.y - orientation_};
      if (i == n - 1) next = Knot{next.x + 1, next.y + orientation_};
      if (collinear(prev, knots_[i], next)) {
        knots_.erase(knots_.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
}

Scalar PLHomeo::lift(const Scalar& x) const {
  if (domain_ == Domain::Line) {
    if (knots_.empty() || x <= knots_.front().x || x >= knots_.back().x) return x;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](const Scalar& v, const Knot& k) { return v < k.x; });
    return interpolate(*(it - 1), *it, x);
  }
  const Scalar k = floor_of(x);
  const Scalar f = x - k;
  const Knot& first = knots_.front();
  const Knot& last = knots_.back();
  Scalar value;
  if (f < first.x) {
    value = interpolate(Knot{last.x - 1, last.y - orientation_}, first, f);
  } else {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), f,
                               [](const Scalar& v, const Knot& kn) { return v < kn.x; });
    const Knot& a = *(it - 1);
    const Knot b = it == knots_.end() ? Knot{first.x + 1, first.y + orientation_} : *it;
    value = interpolate(a, b, f);
  }
  return value + k * orientation_;
}

Scalar PLHomeo::apply(const Scalar& x) const {
  const Scalar v = lift(x);
  return domain_ == Domain::Circle ? frac(v) : v;
}

PLHomeo PLHomeo::inverse() const {
  std::vector<Knot> knots;
  knots.reserve(knots_.size());
  if (domain_ == Domain::Line) {
    for (const auto& k : knots_) knots.push_back(Knot{k.y, k.x});
    return PLHomeo(domain_, std::move(knots), 1);
  }
  for (const auto& k : knots_) {
    const Scalar n = floor_of(k.y);
    knots.push_back(Knot{k.y - n, k.x - n * orientation_});
  }
  std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.x < b.x; });
  return PLHomeo(domain_, std::move(knots), orientation_);
}

bool PLHomeo::is_identity() const { return sup_displacement() == 0; }

Scalar PLHomeo::sup_displacement() const { return sup_distance(*this, identity(domain_)); }

PLHomeo compose(const PLHomeo& outer, const PLHomeo& inner) {
  if (outer.domain_ != inner.domain_) throw KindMismatch("composing line and circle maps");
  const PLHomeo inner_inv = inner.inverse();
  std::vector<Scalar> breaks;
  for (const auto& k : inner.knots_) breaks.push_back(k.x);
  for (const auto& k : outer.knots_) breaks.push_back(inner_inv.apply(k.x));
  sort_unique(breaks);
  std::vector<Knot> knots;
  knots.reserve(breaks.size());
  for (const auto& b : breaks) knots.push_back(Knot{b, outer.lift(inner.lift(b))});
  PLHomeo out(outer.domain_, std::move(knots), outer.orientation_ * inner.orientation_);
  out.simplify();
  return out;
}

Scalar sup_distance(const PLHomeo& a, const PLHomeo& b) {
  if (a.domain() != b.domain()) throw KindMismatch("comparing line and circle maps");
  std::vector<Scalar> breaks;
  for (const auto& k : a.knots()) breaks.push_back(k.x);
  for (const auto& k : b.knots()) breaks.push_back(k.x);
  sort_unique(breaks);
  if (breaks.empty()) return 0;
  if (a.domain() == PLHomeo::Domain::Line) {
    Scalar best = 0;
    for (const auto& x : breaks) best = std::max(best, abs_of(a.lift(x) - b.lift(x)));
    return std::min(best, Scalar(1));
  }
  Scalar best = 0;
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const Scalar& x0 = breaks[i];
    const Scalar x1 = i + 1 < breaks.size() ? breaks[i + 1] : breaks[0] + 1;
    best = std::max(best, arc_sup(a.lift(x0) - b.lift(x0), a.lift(x1) - b.lift(x1)));
  }
  return best;
}

bool operator==(const PLHomeo& a, const PLHomeo& b) {
  return a.domain_ == b.domain_ && sup_distance(a, b) == 0;
}

}  // namespace cdh
