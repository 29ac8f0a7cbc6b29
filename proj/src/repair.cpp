#include <algorithm>
#include <array>
#include <cmath>

#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"

namespace cdh {

namespace {

Scalar pow2s(long e) { return pow2(e); }

// Signed offset of u from c on R/Z, in [-1/2, 1/2).
Scalar circle_offset(const Scalar& u, const Scalar& c) { return frac(u - c + ratio(1, 2)) - ratio(1, 2); }

Scalar tent(const Scalar& y, const Scalar& gate, const Scalar& radius) {
  const Scalar d = circle_distance(y, gate);
  return d >= radius ? Scalar(0) : Scalar(1 - d / radius);
}

// Largest 2^-e not above v (v > 0).
Scalar dyadic_below(const Scalar& v) {
  long e = 0;
  while (pow2s(-e) > v) ++e;
  while (pow2s(-e + 1) <= v) --e;
  return pow2s(-e);
}

}  // namespace

FiberedMove::FiberedMove(std::size_t alpha, std::size_t beta, Circle data, bool forward)
    : alpha_(alpha), beta_(beta), circle_(std::move(data)), forward_(forward) {
  const auto& d = *circle_;
  if (alpha == beta) throw PreconditionFailure("a fibered move needs two distinct coordinates");
  if (!(0 < d.height && d.height < d.half_width && d.half_width < ratio(1, 2) && d.gate_radius > 0)) {
    throw PreconditionFailure("circle move needs 0 < height < half width < 1/2 and a positive gate radius");
  }
}

FiberedMove::FiberedMove(std::size_t alpha, std::size_t beta, Cantor data)
    : alpha_(alpha), beta_(beta), cantor_(std::move(data)) {
  const auto& d = *cantor_;
  if (alpha == beta) throw PreconditionFailure("a fibered move needs two distinct coordinates");
  if (d.from.empty() || d.from.size() != d.to.size() ||
      first_difference(d.from, d.to) != d.from.size() - 1) {
    throw PreconditionFailure("cylinder move needs equal-length words differing only in the last letter");
  }
}

FactorPoint FiberedMove::apply(std::size_t a, const CoordinateOracle& input) const {
  if (a != alpha_) return input(a);
  const FactorPoint x = input(alpha_);
  if (cantor_) {
    const Sequence& s = as_sequence(x);
    if (!as_sequence(input(beta_)).has_prefix(cantor_->gate)) return x;
    if (s.has_prefix(cantor_->from)) return s.replace_prefix(cantor_->to);
    if (s.has_prefix(cantor_->to)) return s.replace_prefix(cantor_->from);
    return x;
  }
  const auto& d = *circle_;
  const Scalar t = tent(as_scalar(input(beta_)), d.gate, d.gate_radius);
  if (t == 0) return x;
  const Scalar& w = d.half_width;
  const Scalar ts = t * d.height;
  const Scalar off = circle_offset(as_scalar(x), d.center);
  Scalar moved;
  if (forward_) {
    if (abs_of(off) >= w) return x;
    moved = off <= 0 ? Scalar(-w + (off + w) * (w + ts) / w) : Scalar(ts + off * (w - ts) / w);
  } else {
    if (abs_of(off) >= w) return x;
    moved = off <= ts ? Scalar(-w + (off + w) * w / (w + ts)) : Scalar((off - ts) * w / (w - ts));
  }
  return Scalar(frac(d.center + moved));
}

ProductMapPtr FiberedMove::inverse() const {
  if (cantor_) return std::make_shared<FiberedMove>(*this);
  return std::make_shared<FiberedMove>(alpha_, beta_, *circle_, !forward_);
}

ConstructionRecord FiberedMove::describe() const {
  ConstructionRecord r{cantor_ ? "fibered-swap" : (forward_ ? "fibered-bump" : "fibered-bump-inverse"), {}};
  r.fields.emplace_back("alpha", std::to_string(alpha_));
  r.fields.emplace_back("beta", std::to_string(beta_));
  if (cantor_) {
    r.fields.emplace_back("from", word_to_string(cantor_->from, true));
    r.fields.emplace_back("to", word_to_string(cantor_->to, true));
    r.fields.emplace_back("gate", word_to_string(cantor_->gate, true));
  } else {
    r.fields.emplace_back("center", to_string(circle_->center));
    r.fields.emplace_back("height", to_string(circle_->height));
    r.fields.emplace_back("half_width", to_string(circle_->half_width));
    r.fields.emplace_back("gate", to_string(circle_->gate));
    r.fields.emplace_back("gate_radius", to_string(circle_->gate_radius));
  }
  return r;
}

Scalar FiberedMove::displacement() const {
  const Scalar scale = pow2s(-static_cast<long>(alpha_));
  if (cantor_) return scale * pow2s(-static_cast<long>(cantor_->from.size()) + 1);
  return scale * circle_->height;
}

Scalar FiberedMove::lipschitz() const {
  // d_alpha(hx, hy) <= slope * d_alpha(x, y) + cross * d_beta(x, y), so
  // L = max(slope, 1 + 2^(beta - alpha) cross).
  const Scalar shift = pow2s(static_cast<long>(beta_) - static_cast<long>(alpha_));
  if (cantor_) {
    if (cantor_->gate.empty()) return 1;
    return 1 + shift * pow2s(static_cast<long>(cantor_->gate.size()) - static_cast<long>(cantor_->from.size()));
  }
  const Scalar& s = circle_->height;
  const Scalar& w = circle_->half_width;
  const Scalar slope = forward_ ? Scalar((w + s) / w) : Scalar(w / (w - s));
  const Scalar dt = forward_ ? s : Scalar(s * w / (w - s));
  return std::max(slope, Scalar(1 + shift * dt / circle_->gate_radius));
}

namespace {

Scalar stage_allowance(std::size_t i) { return i == 0 ? Scalar(1) : pow2s(-static_cast<long>(i) + 1); }

std::vector<std::vector<FactorPoint>> rows_of(const std::vector<ProductPoint>& points, std::size_t n) {
  std::vector<std::vector<FactorPoint>> rows;
  for (const auto& p : points) rows.push_back(p.eval_prefix(n));
  return rows;
}

}  // namespace

RepairResult collision_repair_gpp(const std::vector<ProductPoint>& points, RepairOptions options) {
  RepairResult result;
  if (points.empty()) return result;
  const ProductSpace& space = *points.front().space();
  if (space.is_infinite()) throw PreconditionFailure("collision repair works on finite products");
  for (const auto& f : space.pattern()) {
    if (f.kind() != FactorKind::Circle && f.kind() != FactorKind::CantorBits) {
      throw UnsupportedFactor("collision repair supports Circle and CantorBits factors, got " + to_string(f.kind()));
    }
  }
  const std::size_t n = space.working_depth();
  auto rows = rows_of(points, n);
  const std::size_t count = rows.size();
  auto same = [&](std::size_t a, const FactorPoint& x, const FactorPoint& y) { return space.factor(a).same_point(x, y); };

  Scalar inverse_lipschitz = 1;  // of H_{i-1}^-1
  for (std::size_t step = 0;; ++step) {
    std::size_t collisions = 0;
    std::optional<std::array<std::size_t, 3>> first;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        for (std::size_t a = 0; a < n; ++a) {
          if (!same(a, rows[i][a], rows[j][a])) continue;
          ++collisions;
          if (!first) first = std::array<std::size_t, 3>{i, j, a};
        }
      }
    }
    result.collisions_per_round.push_back(collisions);
    if (!first) break;
    if (step >= options.step_budget) {
      throw PreconditionFailure("step budget exhausted with " + std::to_string(collisions) + " collisions left");
    }
    const auto [i, j, alpha] = *first;
    std::size_t beta = n;
    for (std::size_t b = 0; b < n && beta == n; ++b) {
      if (!same(b, rows[i][b], rows[j][b])) beta = b;
    }
    if (beta == n) throw PreconditionFailure("points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");

    const std::size_t index = result.moves.size();
    const Scalar allowance = stage_allowance(index);
    const long shift = static_cast<long>(beta) - static_cast<long>(alpha);
    std::shared_ptr<const FiberedMove> move;
    if (space.factor(alpha).kind() == FactorKind::Circle) {
      const Scalar& c = as_scalar(rows[i][alpha]);
      const Scalar& g = as_scalar(rows[i][beta]);
      Scalar near_c = ratio(1, 2), near_g = ratio(1, 2);
      for (std::size_t k = 0; k < count; ++k) {
        const Scalar& u = as_scalar(rows[k][alpha]);
        if (u != c) near_c = std::min(near_c, circle_distance(u, c));
        if (space.factor(beta).kind() == FactorKind::Circle) {
          const Scalar& v = as_scalar(rows[k][beta]);
          if (v != g) near_g = std::min(near_g, circle_distance(v, g));
        }
      }
      if (space.factor(beta).kind() != FactorKind::Circle) {
        throw UnsupportedFactor("circle moves are gated by a circle coordinate");
      }
      const Scalar w = dyadic_below(std::min(Scalar(ratio(1, 4)), Scalar(near_c / 2)));
      const Scalar r = dyadic_below(std::min(Scalar(ratio(1, 4)), Scalar(near_g / 2)));
      // Height: at most w/2, keeps the cross term of the Lipschitz bound at
      // most 1, and fits both stage bounds.
      Scalar cap = std::min(Scalar(w / 2), Scalar(r * pow2s(-shift) / 2));
      cap = std::min(cap, Scalar(allowance * pow2s(static_cast<long>(alpha)) / inverse_lipschitz / 2));
      const Scalar s = dyadic_below(cap);
      move = std::make_shared<FiberedMove>(alpha, beta, FiberedMove::Circle{c, s, w, g, r});
    } else {
      if (space.factor(beta).kind() != FactorKind::CantorBits) {
        throw UnsupportedFactor("cylinder moves are gated by a Cantor coordinate");
      }
      const Sequence& c = as_sequence(rows[i][alpha]);
      const Sequence& g = as_sequence(rows[i][beta]);
      std::size_t len = 1, gate_len = 1;
      for (std::size_t k = 0; k < count; ++k) {
        const Sequence& u = as_sequence(rows[k][alpha]);
        if (!(u == c)) len = std::max(len, *first_difference(u, c) + 2);
        const Sequence& v = as_sequence(rows[k][beta]);
        if (!(v == g)) gate_len = std::max(gate_len, *first_difference(v, g) + 1);
      }
      // Keep the cross term at most 1 and fit both stage bounds.
      len = std::max<long>(static_cast<long>(len), static_cast<long>(gate_len) + shift);
      auto fits = [&](std::size_t l) {
        const Scalar d = pow2s(-static_cast<long>(alpha) - static_cast<long>(l) + 1);
        return d <= allowance && inverse_lipschitz * d <= allowance;
      };
      while (!fits(len)) ++len;
      Word from = c.prefix(len), to = from;
      to.back() = 1 - to.back();
      move = std::make_shared<FiberedMove>(alpha, beta, FiberedMove::Cantor{from, to, g.prefix(gate_len)});
    }

    StageEntry entry;
    entry.index = index;
    entry.displacement = move->displacement();
    entry.inverse_step = inverse_lipschitz * std::static_pointer_cast<const FiberedMove>(move->inverse())->displacement();
    entry.certified = true;
    inverse_lipschitz *= std::static_pointer_cast<const FiberedMove>(move->inverse())->lipschitz();
    result.ledger.push_back(entry);
    for (auto& row : rows) {
      row[alpha] = move->apply(alpha, [&](std::size_t b) { return row[b]; });
    }
    result.moves.push_back(std::move(move));
  }

  for (const auto& p : points) {
    ProductPoint q = p;
    for (const auto& m : result.moves) q = q.then(m);
    result.image.push_back(std::move(q));
  }
  result.final_report = check_general_position(result.image, n);
  return result;
}

// ---- boundary chase ---------------------------------------------------------

CollarPush::CollarPush(std::size_t factors, double eps, bool forward) : factors_(factors), eps_(eps), forward_(forward) {
  if (!(eps > 0 && eps < 1)) throw PreconditionFailure("collar width must lie in (0, 1)");
}

FactorPoint CollarPush::apply(std::size_t a, const CoordinateOracle& input) const {
  const FactorPoint x = input(a);
  if (a >= factors_) return x;
  return Vec(forward_ ? Vec((1 - eps_) * as_vector(x)) : Vec(as_vector(x) / (1 - eps_)));
}

ProductMapPtr CollarPush::inverse() const { return std::make_shared<CollarPush>(factors_, eps_, !forward_); }

ConstructionRecord CollarPush::describe() const {
  return ConstructionRecord{forward_ ? "collar-push" : "collar-push-inverse", {{"eps", std::to_string(eps_)}}};
}

DiscFiberedShift::DiscFiberedShift(std::size_t beta, Vec center, double radius, Vec shift, Vec gate,
                                   double gate_radius, bool forward)
    : beta_(beta), center_(std::move(center)), radius_(radius), shift_(std::move(shift)), gate_(std::move(gate)),
      gate_radius_(gate_radius), forward_(forward) {
  if (beta == 0) throw PreconditionFailure("the gate must be a coordinate other than 0");
  if (!(shift_.norm() < radius_)) throw PreconditionFailure("shift must be shorter than the bump radius");
}

FactorPoint DiscFiberedShift::apply(std::size_t a, const CoordinateOracle& input) const {
  const FactorPoint xp = input(a);
  if (a != 0) return xp;
  const double t = std::max(0.0, 1 - (as_vector(input(beta_)) - gate_).norm() / gate_radius_);
  const Vec& y = as_vector(xp);
  if (t == 0) return xp;
  auto push = [&](const Vec& z) { return Vec(t * std::max(0.0, 1 - (z - center_).norm() / radius_) * shift_); };
  if (forward_) return Vec(y + push(y));
  // z + push(z) = y has a unique solution; push is a contraction (ratio 1/2 or less).
  Vec z = y;
  for (int it = 0; it < 200; ++it) {
    const Vec next = y - push(z);
    const double change = (next - z).norm();
    z = next;
    if (change == 0) break;
  }
  return z;
}

ProductMapPtr DiscFiberedShift::inverse() const {
  return std::make_shared<DiscFiberedShift>(beta_, center_, radius_, shift_, gate_, gate_radius_, !forward_);
}

ConstructionRecord DiscFiberedShift::describe() const {
  return ConstructionRecord{forward_ ? "disc-fibered-shift" : "disc-fibered-shift-inverse",
                            {{"beta", std::to_string(beta_)}, {"radius", std::to_string(radius_)}}};
}

ChaseResult boundary_chase(const std::vector<ProductPoint>& points, double eps) {
  ChaseResult out;
  if (points.empty()) {
    out.interior = out.first_projection_injective = true;
    return out;
  }
  const ProductSpace& space = *points.front().space();
  if (space.is_infinite()) throw PreconditionFailure("boundary chase works on finite products");
  for (const auto& f : space.pattern()) {
    if (f.kind() != FactorKind::Disc) throw UnsupportedFactor("boundary chase needs Disc factors, got " + to_string(f.kind()));
  }
  const std::size_t n = space.working_depth();
  const double tol = space.factor(0).tolerance();
  auto rows = rows_of(points, n);
  auto apply_all = [&](const ProductMapPtr& m) {
    out.maps.push_back(m);
    for (auto& row : rows) {
      std::vector<FactorPoint> next;
      for (std::size_t a = 0; a < n; ++a) next.push_back(m->apply(a, [&](std::size_t b) { return row[b]; }));
      row = std::move(next);
    }
  };

  bool on_boundary = false;
  for (const auto& row : rows) {
    for (const auto& x : row) on_boundary = on_boundary || as_vector(x).norm() >= 1 - tol;
  }
  if (on_boundary) apply_all(std::make_shared<CollarPush>(n, eps));

  for (std::size_t guard = 0; guard < rows.size() * rows.size() + 1; ++guard) {
    std::optional<std::pair<std::size_t, std::size_t>> clash;
    for (std::size_t i = 0; i < rows.size() && !clash; ++i) {
      for (std::size_t j = i + 1; j < rows.size() && !clash; ++j) {
        if ((as_vector(rows[i][0]) - as_vector(rows[j][0])).norm() <= tol) clash = std::make_pair(i, j);
      }
    }
    if (!clash) break;
    const auto [i, j] = *clash;
    std::size_t beta = 0;
    for (std::size_t b = 1; b < n && beta == 0; ++b) {
      if ((as_vector(rows[i][b]) - as_vector(rows[j][b])).norm() > tol) beta = b;
    }
    if (beta == 0) throw PreconditionFailure("points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    const Vec c = as_vector(rows[i][0]);
    const Vec g = as_vector(rows[i][beta]);
    double radius = std::min(0.25, (1 - c.norm()) / 2), gate_radius = 0.25;
    for (const auto& row : rows) {
      const double dc = (as_vector(row[0]) - c).norm();
      if (dc > tol) radius = std::min(radius, dc / 2);
      const double dg = (as_vector(row[beta]) - g).norm();
      if (dg > tol) gate_radius = std::min(gate_radius, dg / 2);
    }
    Vec v = Vec::Zero(c.size());
    v[0] = radius / 2;
    apply_all(std::make_shared<DiscFiberedShift>(beta, c, radius, v, g, gate_radius));
  }

  for (const auto& p : points) {
    ProductPoint q = p;
    for (const auto& m : out.maps) q = q.then(m);
    out.image.push_back(std::move(q));
  }
  out.interior = true;
  out.first_projection_injective = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& x : rows[i]) out.interior = out.interior && as_vector(x).norm() < 1 - tol;
    for (std::size_t j = 0; j < i; ++j) {
      if ((as_vector(rows[i][0]) - as_vector(rows[j][0])).norm() <= tol) out.first_projection_injective = false;
    }
  }
  return out;
}

}  // namespace cdh
