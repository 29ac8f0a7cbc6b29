#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdh/convenient_pairs.hpp"
#include "cdh/convergence.hpp"
#include "cdh/product.hpp"

namespace cdh {

/// Disagreement data for one pair {points[i], points[j]}.
struct PairCollision {
  std::size_t i = 0, j = 0;
  std::vector<std::size_t> disagree;  // Omega_p below the depth
  std::vector<std::size_t> agree;
  bool disagrees_everywhere() const { return agree.empty(); }
};

struct CollisionReport {
  std::size_t depth = 0;
  std::vector<PairCollision> pairs;
  bool general_position = true;
  /// Number of (pair, index) collisions.
  std::size_t collisions() const;
};

/// Compares every pair at every index below depth (capped by the number of
/// factors for finite products).
CollisionReport check_general_position(const std::vector<ProductPoint>& points, std::size_t depth);

// ---- greedy dense construction ------------------------------------------

/// The n-th basic box: a basic open set (by per-factor index, see
/// basic_set_contains) at each listed coordinate, the whole factor elsewhere.
/// n -> finite sequence of naturals is a bijection, so every finite box
/// specification appears.
std::vector<std::size_t> basic_box(std::size_t n);

/// Per-factor enumeration of a countable pi-base. Index 0 is the whole space.
/// Cantor: shortlex cylinders. Baire: cylinders over basic_box(b) as a word.
/// Circle: dyadic arcs. Line: dyadic intervals. Float kinds are unsupported.
bool basic_set_contains(const FactorSpace& space, std::size_t index, const FactorPoint& p);

/// The cylinder word of basic set `index` on a sequence factor.
Word basic_word(const FactorSpace& space, std::size_t index);

bool box_contains(const ProductSpace& space, std::size_t n, const ProductPoint& p);

/// A closed set with dense open complement, given as a membership test.
struct ForbiddenSet {
  std::string name;
  std::function<bool(const ProductPoint&)> contains;
};

struct GreedyOptions {
  /// Candidates tried per point before the density probe gives up.
  std::size_t probe_budget = 64;
};

/// Points d_0, ..., d_{N-1} with d_n in box n, coordinatewise distinct at
/// every index (the base pattern gives each point its own tail value), and
/// outside every forbidden set. Throws PreconditionFailure when a forbidden
/// set swallows every probed candidate of some box.
std::vector<ProductPoint> greedy_dense_gp(std::shared_ptr<const ProductSpace> space, std::size_t count,
                                          const std::vector<ForbiddenSet>& forbidden = {},
                                          GreedyOptions options = {});

// ---- weak general position -------------------------------------------------

/// x -> (s_a(x(a), x(0)) for a in Omega, x(a) otherwise); the inverse uses t_a.
class PairProductMap : public ProductMap {
 public:
  PairProductMap(std::set<std::size_t> omega, std::map<std::size_t, ConvenientPair> pairs, bool forward = true);
  FactorPoint apply(std::size_t alpha, const CoordinateOracle& input) const override;
  ProductMapPtr inverse() const override;
  ConstructionRecord describe() const override;

 private:
  std::set<std::size_t> omega_;
  std::shared_ptr<const std::map<std::size_t, ConvenientPair>> pairs_;
  bool forward_;
};

struct WgppResult {
  std::set<std::size_t> omega;
  ProductMapPtr map;
  std::vector<ProductPoint> image;
  CollisionReport before;
  CollisionReport after;
};

/// Requires pi_0 injective on D and, for every a in [1, depth) that Omega
/// uses, a pair for (X_a, X_0) focused on (pi_a[D], pi_0[D]). Omega is built
/// by alternately keeping and reserving the unassigned indices of each
/// disagreement set.
WgppResult wgpp_transform(const std::vector<ProductPoint>& points, const std::map<std::size_t, ConvenientPair>& pairs,
                          std::size_t depth);

// ---- block regrouping -------------------------------------------------------

struct PartitionPlan {
  std::vector<std::vector<std::size_t>> blocks;
  /// Omega* split into consecutive chunks; each block meets a chunk fully or not at all.
  std::vector<std::vector<std::size_t>> chunks;
  /// witness[b][(i, j)] = an index of block b where points i and j differ.
  std::vector<std::map<std::pair<std::size_t, std::size_t>, std::size_t>> witnesses;
};

/// Disjoint blocks covering [0, depth), each separating every pair of D.
/// Throws PreconditionFailure naming a pair that no block can separate.
PartitionPlan block_regroup(const std::vector<ProductPoint>& points, std::size_t depth,
                            const std::set<std::size_t>& omega_star = {}, std::size_t chunk_size = 2);

/// Empty string when the plan satisfies disjointness, covering, injectivity
/// and chunk compatibility; otherwise the first failure.
std::string audit_plan(const PartitionPlan& plan, const std::vector<ProductPoint>& points, std::size_t depth);

// ---- collision repair --------------------------------------------------------

/// A two-coordinate move: coordinate alpha is moved by a homeomorphism whose
/// strength depends on coordinate beta, so points sharing x(alpha) but not
/// x(beta) are pulled apart. Circle factors use a PL bump of height s and
/// half-width w scaled by a tent of radius r around the gate; Cantor factors
/// swap the cylinders [c|L] and [c'|L] inside the gate cylinder [g|Lg].
class FiberedMove : public ProductMap {
 public:
  struct Circle {
    Scalar center, height, half_width;
    Scalar gate, gate_radius;
  };
  struct Cantor {
    Word from, to;  // equal length, differing in the last letter
    Word gate;
  };

  FiberedMove(std::size_t alpha, std::size_t beta, Circle data, bool forward = true);
  FiberedMove(std::size_t alpha, std::size_t beta, Cantor data);

  FactorPoint apply(std::size_t a, const CoordinateOracle& input) const override;
  ProductMapPtr inverse() const override;
  ConstructionRecord describe() const override;

  std::size_t alpha() const { return alpha_; }
  std::size_t beta() const { return beta_; }
  /// sup d*(h x, x), exactly.
  Scalar displacement() const;
  /// A Lipschitz constant for the map with respect to d*.
  Scalar lipschitz() const;

 private:
  std::size_t alpha_, beta_;
  std::optional<Circle> circle_;
  std::optional<Cantor> cantor_;
  bool forward_ = true;
};

struct RepairOptions {
  std::size_t step_budget = 10000;
};

struct RepairResult {
  std::vector<std::shared_ptr<const FiberedMove>> moves;
  /// Stage bounds as in a convergence certificate: displacement of h_i and a
  /// Lipschitz bound for sup d*(H_i^-1 x, H_{i-1}^-1 x); both <= 2^-(i-1)
  /// for i >= 1, and h_0 moves at most 1.
  std::vector<StageEntry> ledger;
  std::vector<ProductPoint> image;
  std::vector<std::size_t> collisions_per_round;
  CollisionReport final_report;
};

/// Repairs every (pair, coordinate) collision of D in a finite product of
/// Circle and CantorBits factors. Throws PreconditionFailure on other
/// factors, on repeated points, or when the step budget runs out.
RepairResult collision_repair_gpp(const std::vector<ProductPoint>& points, RepairOptions options = {});

// ---- boundary chase ------------------------------------------------------

/// x -> (1 - eps) x in one disc factor. An embedding of D^m into its interior,
/// not a homeomorphism of D^m.
class CollarPush : public ProductMap {
 public:
  CollarPush(std::size_t factors, double eps, bool forward = true);
  FactorPoint apply(std::size_t a, const CoordinateOracle& input) const override;
  ProductMapPtr inverse() const override;
  ConstructionRecord describe() const override;

 private:
  std::size_t factors_;
  double eps_;
  bool forward_;
};

/// x(0) -> x(0) + lambda(x(beta)) bump(|x(0) - c|) v on a disc factor, where
/// lambda is a tent of radius r around the gate and bump(t) = max(0, 1 - t/R).
/// |v| < R keeps every fibre map a homeomorphism; the inverse is a
/// fixed-point iteration.
class DiscFiberedShift : public ProductMap {
 public:
  DiscFiberedShift(std::size_t beta, Vec center, double radius, Vec shift, Vec gate, double gate_radius,
                   bool forward = true);
  FactorPoint apply(std::size_t a, const CoordinateOracle& input) const override;
  ProductMapPtr inverse() const override;
  ConstructionRecord describe() const override;

 private:
  std::size_t beta_;
  Vec center_;
  double radius_;
  Vec shift_;
  Vec gate_;
  double gate_radius_;
  bool forward_;
};

struct ChaseResult {
  std::vector<ProductMapPtr> maps;
  std::vector<ProductPoint> image;
  bool interior = false;
  bool first_projection_injective = false;
};

/// On a finite product of Disc factors: a collar push when some point lies on
/// a boundary sphere, then fibered shifts in coordinate 0 until pi_0 is
/// injective on D.
ChaseResult boundary_chase(const std::vector<ProductPoint>& points, double eps = 1.0 / 16);

}  // namespace cdh
