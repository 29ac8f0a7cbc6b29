#include "cdh/convenient_pairs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cdh/errors.hpp"

namespace cdh {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_dims(int n, int m) {
  if (n < 1 || n >= m) {
    throw PreconditionFailure("need 1 <= n < m, got n = " + std::to_string(n) + ", m = " + std::to_string(m));
  }
}

// Largest power of two not above v (v > 0).
double dyadic_floor(double v) { return std::ldexp(1.0, static_cast<int>(std::floor(std::log2(v)))); }

Vec clamp_to_disc(Vec v) {
  const double r = v.norm();
  if (r > 1) v /= r;
  return v;
}

Vec random_near(const Vec& x0, double delta, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    Vec g(x0.size());
    for (int i = 0; i < g.size(); ++i) g[i] = normal(rng);
    Vec d = x0 + delta * unit(rng) * g / std::max(g.norm(), 1e-12);
    d.normalize();
    if ((d - x0).norm() < delta) return d;
  }
}

}  // namespace

ConvenientPair group_pair(const FactorSpace& group, PointPredicate in_y) {
  if (!group.has_group()) throw UnsupportedFactor(to_string(group.kind()) + " has no group structure");
  ConvenientPair p{group, group, nullptr, nullptr, nullptr, nullptr, "(G, Y)", "group", group.is_exact()};
  p.s = [group](const FactorPoint& x, const FactorPoint& y) { return group.group_product(x, y); };
  p.t = [group](const FactorPoint& x, const FactorPoint& y) {
    return group.group_product(x, group.group_inverse(y));
  };
  p.focus_x = [](const FactorPoint&) { return true; };
  p.focus_y = in_y ? std::move(in_y) : PointPredicate([](const FactorPoint&) { return true; });
  return p;
}

std::function<Vec(const Vec&)> wrap_map(int n, int m) {
  require_dims(n, m);
  return [n, m](const Vec& y) {
    if (y.size() != n) throw KindMismatch("wrap map expects a vector of dimension " + std::to_string(n));
    const double r = y.norm();
    if (r > 1 + 1e-12) throw PreconditionFailure("wrap map is defined on the closed unit disc");
    Vec out = Vec::Zero(m);
    if (r >= 1) return out;
    out[0] = -std::cos(kPi * r) / 2 - 0.5;
    if (r > 0) out.segment(1, n) = std::sin(kPi * r) / (2 * r) * y;
    return out;
  };
}

FloatHomeo radial_homeo(int m) {
  if (m < 1) throw PreconditionFailure("dimension must be positive");
  return FloatHomeo(
      "radial", m,
      [](const Vec& x) -> Vec {
        const double r = x.norm();
        if (r >= 1) throw PreconditionFailure("x / (1 - |x|) is undefined on the unit sphere");
        return x / (1 - r);
      },
      [](const Vec& z) -> Vec { return z / (1 + z.norm()); }, 1e-12);
}

ConvenientPair local_pair(int m, int n, int k) {
  require_dims(n, m);
  if (k < 0) throw PreconditionFailure("k must be non-negative");
  const auto phi = wrap_map(n, m);
  const double scale = std::ldexp(1.0, -k);
  auto make = [phi, scale](double sign) {
    return [phi, scale, sign](const FactorPoint& xp, const FactorPoint& yp) -> FactorPoint {
      const Vec& x = as_vector(xp);
      const double r = x.norm();
      if (r >= 1) return x;
      const Vec z = x / (1 - r) + sign * scale * phi(as_vector(yp));
      return Vec(z / (1 + z.norm()));
    };
  };
  ConvenientPair p{FactorSpace::disc(m), FactorSpace::disc(n), make(1), make(-1), nullptr, nullptr,
                   "(B^" + std::to_string(m) + ", B^" + std::to_string(n) + ")",
                   "local(" + std::to_string(m) + "," + std::to_string(n) + "," + std::to_string(k) + ")", false};
  p.focus_x = [](const FactorPoint& x) { return as_vector(x).norm() < 1; };
  p.focus_y = [](const FactorPoint& y) { return as_vector(y).norm() < 1; };
  return p;
}

namespace {

struct Projection {
  std::vector<Vec> centers;
  double radius;
};

// Distinct projections of D and the common chart radius: the largest dyadic
// at most a third of every separation and of every distance to the sphere.
Projection project(const std::vector<Vec>& pts, const char* which) {
  Projection out{{}, 1.0};
  for (const auto& p : pts) {
    const bool seen = std::any_of(out.centers.begin(), out.centers.end(),
                                  [&](const Vec& c) { return (c - p).norm() == 0; });
    if (!seen) out.centers.push_back(p);
  }
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.centers.size(); ++i) {
    const double to_sphere = 1 - out.centers[i].norm();
    if (to_sphere <= 0) throw PreconditionFailure(std::string("a point of D lies on the boundary in ") + which);
    bound = std::min(bound, to_sphere);
    for (std::size_t j = 0; j < i; ++j) bound = std::min(bound, (out.centers[i] - out.centers[j]).norm());
  }
  if (out.centers.empty()) return out;
  if (bound / 3 < 1e-12) {
    throw PreconditionFailure(std::string("projections in ") + which + " are too close to separate");
  }
  out.radius = dyadic_floor(bound / 3);
  return out;
}

const GlueChart* find_chart(const std::vector<GlueChart>& charts, const Vec& x, const Vec& y) {
  for (const auto& c : charts) {
    if ((x - c.x_center).norm() <= c.x_radius && (y - c.y_center).norm() <= c.y_radius) return &c;
  }
  return nullptr;
}

}  // namespace

GluedPair glue_pairs(const FactorSpace& x_space, const FactorSpace& y_space,
                     const std::vector<std::pair<Vec, Vec>>& points, int first_k) {
  for (const auto* s : {&x_space, &y_space}) {
    if (s->kind() != FactorKind::Disc && s->kind() != FactorKind::Ball) {
      throw UnsupportedFactor("glue_pairs works on discs and balls, got " + to_string(s->kind()));
    }
  }
  const int m = x_space.dimension(), n = y_space.dimension();
  require_dims(n, m);
  std::vector<Vec> xs, ys;
  for (const auto& [x, y] : points) {
    x_space.check_point(x);
    y_space.check_point(y);
    xs.push_back(x);
    ys.push_back(y);
  }
  const Projection px = project(xs, "X"), py = project(ys, "Y");

  auto charts = std::make_shared<std::vector<GlueChart>>();
  int k = first_k;
  for (const auto& p : px.centers) {
    for (const auto& q : py.centers) charts->push_back(GlueChart{p, q, px.radius, py.radius, k++});
  }
  std::vector<ConvenientPair> locals;
  for (const auto& c : *charts) locals.push_back(local_pair(m, n, c.k));
  auto local = std::make_shared<std::vector<ConvenientPair>>(std::move(locals));

  auto make = [charts, local](bool forward) {
    return [charts, local, forward](const FactorPoint& xp, const FactorPoint& yp) -> FactorPoint {
      const Vec& x = as_vector(xp);
      const Vec& y = as_vector(yp);
      const GlueChart* c = find_chart(*charts, x, y);
      if (!c) return x;
      const auto& pair = (*local)[static_cast<std::size_t>(c - charts->data())];
      const Vec u = (x - c->x_center) / c->x_radius;
      if (u.norm() >= 1) return x;
      const Vec v = clamp_to_disc((y - c->y_center) / c->y_radius);
      const FactorPoint w = forward ? pair.s(u, v) : pair.t(u, v);
      return Vec(c->x_center + c->x_radius * as_vector(w));
    };
  };

  auto member = [](std::vector<Vec> centers) {
    return [centers = std::move(centers)](const FactorPoint& p) {
      const Vec& v = as_vector(p);
      return std::any_of(centers.begin(), centers.end(), [&](const Vec& c) { return (c - v).norm() == 0; });
    };
  };
  ConvenientPair pair{x_space,      y_space,   make(true), make(false), member(px.centers), member(py.centers),
                      "(pi_X[D], pi_Y[D])", "glued", false};
  return GluedPair{std::move(pair), *charts};
}

EquicontinuityReport verify_equicontinuity_bounds(int m, int n, const std::vector<double>& eps_values,
                                                  const std::vector<Vec>& x0s, int samples, int max_k,
                                                  unsigned seed) {
  require_dims(n, m);
  const auto h = radial_homeo(m);
  EquicontinuityReport report{{}, {}, true, true};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double eps : eps_values) {
    for (const auto& x0 : x0s) {
      if (x0.size() != m || std::abs(x0.norm() - 1) > 1e-12) throw PreconditionFailure("x0 must be a unit vector of R^m");
      EquicontinuityRow row{eps, x0, 2 / eps, eps / 2, 0, 1 + 6 / eps, eps / 3, 0, true};
      // |h^-1(z) - x0| <= 1 / (1 + |z|) + |z/|z| - x0|.
      for (int i = 0; i < samples; ++i) {
        const Vec z = random_near(x0, row.delta_easy, rng) * row.r_easy * (1 + 4 * unit(rng)) * (1 + 1e-9);
        row.worst_easy = std::max(row.worst_easy, (h.apply_inverse(z) - x0).norm());
      }
      // The aligned direction with v = 0 is checked first.
      row.worst_hard = ((2 * row.r_hard * x0).normalized() - x0).norm();
      const auto vs = sample_ball(m, samples, seed + 17);
      for (int i = 0; i < samples; ++i) {
        const Vec u = random_near(x0, row.delta_hard, rng) * row.r_hard * (1 + 4 * unit(rng)) * (1 + 1e-9);
        const Vec w = u + vs[static_cast<std::size_t>(i)];
        row.worst_hard = std::max(row.worst_hard, (w / w.norm() - x0).norm());
      }
      row.passed = row.worst_easy < eps && row.worst_hard < eps;
      report.passed = report.passed && row.passed;
      report.rows.push_back(std::move(row));
    }
  }
  const auto xs = sample_ball(m, samples, seed + 1);
  const auto ys = sample_ball(n, samples, seed + 2);
  for (int k = 0; k <= max_k; ++k) {
    const auto pair = local_pair(m, n, k);
    double sup = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sup = std::max(sup, (as_vector(pair.s(xs[i], ys[i])) - xs[i]).norm());
    }
    if (!report.sup_by_k.empty() && sup > report.sup_by_k.back() + 1e-12) report.sup_non_increasing = false;
    report.sup_by_k.push_back(sup);
  }
  report.passed = report.passed && report.sup_non_increasing;
  return report;
}

std::vector<PairGridRow> pair_grid(const ConvenientPair& pair, int count, unsigned seed) {
  const auto xs = sample_ball(pair.x_space.dimension(), count, seed);
  const auto ys = sample_ball(pair.y_space.dimension(), count, seed + 1);
  std::vector<PairGridRow> rows;
  for (int i = 0; i < count; ++i) {
    const Vec& x = xs[static_cast<std::size_t>(i)];
    const Vec& y = ys[static_cast<std::size_t>(i)];
    Vec s = as_vector(pair.s(x, y));
    const double d = (s - x).norm();
    rows.push_back(PairGridRow{x, y, std::move(s), d});
  }
  return rows;
}

std::string grid_to_csv(const std::vector<PairGridRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  if (rows.empty()) return "displacement\n";
  auto header = [&](const char* name, long size) {
    for (long i = 0; i < size; ++i) out << name << i << ',';
  };
  header("x", rows[0].x.size());
  header("y", rows[0].y.size());
  header("s", rows[0].s.size());
  out << "displacement\n";
  for (const auto& r : rows) {
    for (const Vec* v : {&r.x, &r.y, &r.s}) {
      for (long i = 0; i < v->size(); ++i) out << (*v)[i] << ',';
    }
    out << r.displacement << '\n';
  }
  return out.str();
}

}  // namespace cdh
