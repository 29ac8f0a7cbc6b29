#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdh/float_homeo.hpp"
#include "cdh/spaces.hpp"

namespace cdh {

using PairMap = std::function<FactorPoint(const FactorPoint& x, const FactorPoint& y)>;
using PointPredicate = std::function<bool(const FactorPoint&)>;

/// Continuous s, t : X x Y -> X with s(t(x, y), y) = x = t(s(x, y), y).
/// The pair is focused on (A, B) when s(x, y) != s(x, y') for x in A and
/// distinct y, y' in B.
struct ConvenientPair {
  FactorSpace x_space;
  FactorSpace y_space;
  PairMap s;
  PairMap t;
  PointPredicate focus_x;
  PointPredicate focus_y;
  std::string focus;       // e.g. "(G, Y)" or "(B^3, B^2)"
  std::string provenance;  // "group", "local(m,n,k)" or "glued"
  bool exact = false;
};

/// s(x, y) = x * y, t(x, y) = x * y^-1, focused on (G, Y). `in_y` restricts
/// the second argument; by default Y = G.
ConvenientPair group_pair(const FactorSpace& group, PointPredicate in_y = nullptr);

/// phi : D^n -> R^m, phi(y) = i(psi(y) / 2 - e_1 / 2) with
/// psi(y) = (-cos(pi |y|), sin(pi |y|) y / |y|) on the sphere S^n.
/// Injective on the open ball, zero on the boundary sphere, norm <= 1.
/// Throws PreconditionFailure unless 1 <= n < m.
std::function<Vec(const Vec&)> wrap_map(int n, int m);

/// h(x) = x / (1 - |x|) from B^m onto R^m, with inverse z / (1 + |z|). The
/// forward map throws PreconditionFailure at |x| >= 1.
FloatHomeo radial_homeo(int m);

/// The pair (s_k, t_k) on (D^m, D^n): h^-1(h(x) +- 2^-k phi(y)) inside the
/// ball, x on the boundary sphere. Focused on (B^m, B^n).
ConvenientPair local_pair(int m, int n, int k);

struct GlueChart {
  Vec x_center;
  Vec y_center;
  double x_radius;
  double y_radius;
  int k;
};

/// A convenient pair on X x Y (X = Disc(m) or Ball(m), Y = Disc(n) or
/// Ball(n)) focused on the projections of the finite set D. One chart per
/// point of pi_X[D] x pi_Y[D]; outside the charts s and t are the projection.
struct GluedPair {
  ConvenientPair pair;
  std::vector<GlueChart> charts;
};

/// Throws PreconditionFailure when a point of D lies on the boundary or two
/// projections are too close to separate.
GluedPair glue_pairs(const FactorSpace& x_space, const FactorSpace& y_space,
                     const std::vector<std::pair<Vec, Vec>>& points, int first_k = 0);

struct EquicontinuityRow {
  double eps;
  Vec x0;
  double r_easy, delta_easy;  // |h^-1(z) - x0| < eps
  double worst_easy;
  double r_hard, delta_hard;  // |(u+v)/|u+v| - x0| < eps
  double worst_hard;
  bool passed;
};

struct EquicontinuityReport {
  std::vector<EquicontinuityRow> rows;
  /// sup over the grid of |s_k(x, y) - x| for k = 0, 1, ...
  std::vector<double> sup_by_k;
  bool sup_non_increasing;
  bool passed;
};

/// For each eps and each boundary point x0 (unit vectors of R^m), checks
/// R = 2/eps, delta = eps/2 for the first inequality and R = 1 + 6/eps,
/// delta = eps/3 for the second on `samples` seeded draws.
EquicontinuityReport verify_equicontinuity_bounds(int m, int n, const std::vector<double>& eps_values,
                                                  const std::vector<Vec>& x0s, int samples, int max_k,
                                                  unsigned seed = 1);

struct PairGridRow {
  Vec x, y, s;
  double displacement;
};

/// Rows (x, y, s(x, y), |s(x, y) - x|) over seeded samples of the two balls.
std::vector<PairGridRow> pair_grid(const ConvenientPair& pair, int count, unsigned seed);
std::string grid_to_csv(const std::vector<PairGridRow>& rows);

}  // namespace cdh
