#include "cdh/homeo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cdh/errors.hpp"

namespace cdh {

Homeo Homeo::identity(const FactorSpace& space) {
  switch (space.kind()) {
    case FactorKind::CantorBits:
    case FactorKind::BaireInts: return CylinderHomeo(space.alphabet());
    case FactorKind::Circle: return PLHomeo::identity(PLHomeo::Domain::Circle);
    case FactorKind::Line: return PLHomeo::identity(PLHomeo::Domain::Line);
    default: return FloatHomeo::identity(space.dimension());
  }
}

const CylinderHomeo& Homeo::cylinder() const {
  if (const auto* h = std::get_if<CylinderHomeo>(&rep_)) return *h;
  throw KindMismatch("not a cylinder map");
}

const PLHomeo& Homeo::pl() const {
  if (const auto* h = std::get_if<PLHomeo>(&rep_)) return *h;
  throw KindMismatch("not a piecewise linear map");
}

const FloatHomeo& Homeo::floating() const {
  if (const auto* h = std::get_if<FloatHomeo>(&rep_)) return *h;
  throw KindMismatch("not a float map");
}

std::string Homeo::family() const {
  if (std::holds_alternative<CylinderHomeo>(rep_)) return "cylinder";
  if (std::holds_alternative<PLHomeo>(rep_)) return "pl";
  return "float";
}

FactorPoint Homeo::apply(const FactorPoint& x) const {
  return std::visit(
      [&](const auto& h) -> FactorPoint {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, CylinderHomeo>) {
          return h.apply(as_sequence(x));
        } else if constexpr (std::is_same_v<T, PLHomeo>) {
          return h.apply(as_scalar(x));
        } else {
          return h.apply(as_vector(x));
        }
      },
      rep_);
}

Homeo Homeo::inverse() const {
  return std::visit([](const auto& h) { return Homeo(h.inverse()); }, rep_);
}

Bound Homeo::sup_displacement() const {
  if (const auto* f = std::get_if<FloatHomeo>(&rep_)) return Bound{Scalar(f->sampled_displacement()), false};
  if (const auto* c = std::get_if<CylinderHomeo>(&rep_)) return Bound{c->sup_displacement(), true};
  return Bound{pl().sup_displacement(), true};
}

bool Homeo::is_identity() const {
  const Bound b = sup_displacement();
  return b.value == 0;
}

Homeo compose(const Homeo& outer, const Homeo& inner) {
  if (outer.rep().index() != inner.rep().index()) throw KindMismatch("composing different map families");
  return std::visit(
      [&](const auto& o) -> Homeo {
        using T = std::decay_t<decltype(o)>;
        return Homeo(compose(o, std::get<T>(inner.rep())));
      },
      outer.rep());
}

Bound sup_distance(const Homeo& a, const Homeo& b) {
  if (a.rep().index() != b.rep().index()) throw KindMismatch("comparing different map families");
  if (!a.exact()) {
    const auto& fa = a.floating();
    const auto& fb = b.floating();
    double best = 0;
    for (const auto& x : sample_ball(fa.dimension(), 4096, 3)) best = std::max(best, (fa.apply(x) - fb.apply(x)).norm());
    return Bound{Scalar(best), false};
  }
  if (const auto* ca = std::get_if<CylinderHomeo>(&a.rep())) return Bound{sup_distance(*ca, b.cylinder()), true};
  return Bound{sup_distance(a.pl(), b.pl()), true};
}

void check_homeo(const FactorSpace& space, const Homeo& h) {
  if (space.is_sequence_space()) {
    if (h.cylinder().alphabet() != space.alphabet()) throw KindMismatch("cylinder map has the wrong alphabet");
    return;
  }
  if (space.kind() == FactorKind::Circle || space.kind() == FactorKind::Line) {
    const auto want = space.kind() == FactorKind::Circle ? PLHomeo::Domain::Circle : PLHomeo::Domain::Line;
    if (h.pl().domain() != want) throw KindMismatch("piecewise linear map on the wrong domain");
    return;
  }
  if (h.floating().dimension() != space.dimension()) throw KindMismatch("float map of the wrong dimension");
}

std::size_t ball_cylinder_length(const Scalar& r) {
  if (r <= 0) throw PreconditionFailure("radius must be positive");
  std::size_t len = 0;
  while (pow2(-static_cast<long>(len)) >= r) ++len;
  return len;
}

namespace {

void check_bijection(const FactorSpace& space, const FiniteBijection& sigma) {
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    space.check_point(sigma[i].first);
    space.check_point(sigma[i].second);
    for (std::size_t j = 0; j < i; ++j) {
      if (space.same_point(sigma[i].first, sigma[j].first) || space.same_point(sigma[i].second, sigma[j].second)) {
        throw PreconditionFailure("finite map is not a bijection");
      }
    }
  }
}

// Distinct finite-support sequences already differ below their largest support.
std::size_t separating_length(const std::vector<const Sequence*>& points) {
  std::size_t m = 0;
  for (const auto* p : points) m = std::max(m, p->support());
  return m;
}

Homeo realize_sequences(const FactorSpace& space, const FiniteBijection& sigma) {
  std::vector<const Sequence*> all;
  for (const auto& [a, b] : sigma) {
    all.push_back(&as_sequence(a));
    all.push_back(&as_sequence(b));
  }
  const std::size_t m = separating_length(all);
  std::map<Word, Word> perm;
  std::set<Word> sources, targets;
  for (const auto& [a, b] : sigma) {
    const Word wa = as_sequence(a).prefix(m);
    const Word wb = as_sequence(b).prefix(m);
    perm[wa] = wb;
    sources.insert(wa);
    targets.insert(wb);
  }
  // Close the partial permutation: targets that are not sources go to
  // sources that are not targets.
  std::vector<Word> free_sources, free_targets;
  for (const auto& w : targets) {
    if (!sources.count(w)) free_sources.push_back(w);
  }
  for (const auto& w : sources) {
    if (!targets.count(w)) free_targets.push_back(w);
  }
  for (std::size_t i = 0; i < free_sources.size(); ++i) perm[free_sources[i]] = free_targets[i];
  return CylinderHomeo::prefix_permutation(space.alphabet(), perm);
}

Homeo realize_line(const FiniteBijection& sigma) {
  std::vector<Knot> knots;
  for (const auto& [a, b] : sigma) knots.push_back(Knot{as_scalar(a), as_scalar(b)});
  if (knots.empty()) return PLHomeo::identity(PLHomeo::Domain::Line);
  std::sort(knots.begin(), knots.end(), [](const Knot& p, const Knot& q) { return p.x < q.x; });
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].y <= knots[i - 1].y) {
      throw OrderViolation("line maps preserve order: " + to_string(knots[i - 1].x) + " < " +
                           to_string(knots[i].x) + " but their images are not increasing");
    }
  }
  Scalar lo = std::min(knots.front().x, knots.front().y) - 1;
  Scalar hi = std::max(knots.back().x, knots.back().y) + 1;
  knots.insert(knots.begin(), Knot{lo, lo});
  knots.push_back(Knot{hi, hi});
  return PLHomeo::line(std::move(knots));
}

Homeo realize_circle(const FiniteBijection& sigma) {
  std::vector<Knot> pts;
  for (const auto& [a, b] : sigma) pts.push_back(Knot{as_scalar(a), as_scalar(b)});
  if (pts.empty()) return PLHomeo::identity(PLHomeo::Domain::Circle);
  std::sort(pts.begin(), pts.end(), [](const Knot& p, const Knot& q) { return p.x < q.x; });
  const std::size_t n = pts.size();
  for (int orientation : {1, -1}) {
    Scalar total = 0;
    std::vector<Knot> knots{pts[0]};
    for (std::size_t i = 1; i <= n; ++i) {
      const Scalar gap = frac((pts[i % n].y - pts[i - 1].y) * orientation);
      total += gap;
      if (i < n) knots.push_back(Knot{pts[i].x, knots.back().y + gap * orientation});
    }
    if (total == 1) return PLHomeo::circle(std::move(knots), orientation);
  }
  throw OrderViolation("circle maps preserve or reverse cyclic order; the " + std::to_string(n) +
                       " requested images are in neither order");
}

}  // namespace

Homeo realize_finite_bijection(const FactorSpace& space, const FiniteBijection& sigma) {
  check_bijection(space, sigma);
  switch (space.kind()) {
    case FactorKind::CantorBits:
    case FactorKind::BaireInts: return realize_sequences(space, sigma);
    case FactorKind::Line: return realize_line(sigma);
    case FactorKind::Circle: return realize_circle(sigma);
    default: throw UnsupportedFactor("finite bijections are not realized on " + to_string(space.kind()));
  }
}

Homeo small_ball_transporter(const FactorSpace& space, const FactorPoint& center, const FactorPoint& target,
                             const Scalar& delta) {
  space.check_point(center);
  space.check_point(target);
  if (delta <= 0) throw PreconditionFailure("delta must be positive");
  const Scalar d = space.distance(center, target);
  if (d >= delta) throw PreconditionFailure("target outside the ball around the center");
  if (space.same_point(center, target) && space.is_exact()) return Homeo::identity(space);

  switch (space.kind()) {
    case FactorKind::CantorBits:
    case FactorKind::BaireInts: {
      const auto& c = as_sequence(center);
      const auto& t = as_sequence(target);
      const std::size_t m = std::max(ball_cylinder_length(delta), separating_length({&c, &t}));
      const Word wc = c.prefix(m);
      const Word wt = t.prefix(m);
      return CylinderHomeo::prefix_permutation(space.alphabet(), {{wc, wt}, {wt, wc}});
    }
    case FactorKind::Line: {
      const Scalar& c = as_scalar(center);
      const Scalar& t = as_scalar(target);
      const Scalar gap = abs_of(t - c);
      const Scalar r = gap >= 1 ? Scalar(gap + 1) : Scalar((gap + std::min(delta, Scalar(1))) / 2);
      return PLHomeo::line({{c - r, c - r}, {c, t}, {c + r, c + r}});
    }
    case FactorKind::Circle: {
      const Scalar& c = as_scalar(center);
      Scalar offset = frac(as_scalar(target) - c);
      if (offset > ratio(1, 2)) offset -= 1;
      if (d == ratio(1, 2)) return PLHomeo::rotation(offset);
      const Scalar r = (d + std::min(delta, ratio(1, 2))) / 2;
      std::vector<Knot> knots;
      for (const Knot& k : {Knot{c - r, c - r}, Knot{c, c + offset}, Knot{c + r, c + r}}) {
        const Scalar f = floor_of(k.x);
        knots.push_back(Knot{k.x - f, k.y - f});
      }
      return PLHomeo::circle(std::move(knots), 1);
    }
    default: {
      const Vec c = as_vector(center);
      const Vec v = as_vector(target) - c;
      const double r = (d.get_d() + delta.get_d()) / 2;
      if (c.norm() + r >= 1.0) {
        throw UnsupportedFactor("the transporter ball must stay inside the open unit ball");
      }
      auto lambda = [c, r](const Vec& x) { return std::max(0.0, 1.0 - (x - c).norm() / r); };
      auto forward = [lambda, v](const Vec& x) -> Vec { return x + lambda(x) * v; };
      auto backward = [lambda, v](const Vec& x) -> Vec {
        // x - lambda(y) v is a contraction in y because |v| < r.
        Vec y = x;
        for (int i = 0; i < 200; ++i) {
          Vec next = x - lambda(y) * v;
          const double step = (next - y).norm();
          y = std::move(next);
          if (step < 1e-16) break;
        }
        return y;
      };
      return FloatHomeo("transporter", space.dimension(), forward, backward, space.tolerance());
    }
  }
}

}  // namespace cdh
