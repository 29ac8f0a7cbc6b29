#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cdh/homeo.hpp"

namespace cdh {

/// A reason a pair (D, E) cannot be matched by any homeomorphism, stated as
/// an invariant that homeomorphisms preserve plus the points that break it.
struct ObstructionCertificate {
  bool witness = false;
  std::string construction;
  std::string invariant;
  std::vector<std::string> facts;
  /// Why the input is not a witness, when it is not.
  std::string reason;
};

// ---- X x 2^omega with X = {(n, q_n)} u ({omega} x omega^omega) ----------------

/// q_n: the n-th finite-support point of omega^omega. n -> q_n is a bijection.
Sequence row_value(std::size_t n);
/// Inverse of row_value. Throws IndexOutOfRange when the index needs more
/// than 64 bits.
std::size_t row_of(const Sequence& q);

/// A point of X x 2^omega: a row (n, q_n) or a limit (omega, y), with its
/// Cantor coordinate.
struct SymbolicPoint {
  enum class Tag { Row, Limit };
  Tag tag = Tag::Row;
  std::size_t row = 0;
  Sequence baire;
  Sequence cantor;

  static SymbolicPoint make_row(std::size_t n, Sequence cantor);
  static SymbolicPoint make_limit(Sequence baire, Sequence cantor);
  std::string describe() const;
};

enum class LocalCompactness { HasCompactNeighborhood, No };
std::string to_string(LocalCompactness c);

/// Row points are isolated in X, so {p} x 2^omega is a compact neighbourhood;
/// limit points have none.
LocalCompactness classify_local_compactness(const SymbolicPoint& p);

/// (n, q_n, c) -> (row_of(phi(q_n)), phi(q_n), psi(c)) and (omega, y, c) ->
/// (omega, phi(y), psi(c)). phi permutes the finite-support points, so rows go
/// to rows and the map is a homeomorphism of X x 2^omega.
struct SymbolicHomeo {
  CylinderHomeo baire{0};
  CylinderHomeo cantor{2};
  SymbolicPoint apply(const SymbolicPoint& p) const;
};

ObstructionCertificate witness_compact_locus(const std::vector<SymbolicPoint>& D,
                                             const std::vector<SymbolicPoint>& E);

/// D = rows 0..count-1, E = rows 1..count-1 plus one limit point.
std::pair<std::vector<SymbolicPoint>, std::vector<SymbolicPoint>> build_compact_locus_witness(std::size_t count);

// ---- products of two-piece sums -----------------------------------------------

/// X_alpha (+) Y_alpha with both pieces connected.
struct TwoPieceFactor {
  FactorSpace piece0;
  FactorSpace piece1;
};

/// prod_alpha (X_alpha (+) Y_alpha) with a repeating factor pattern, truncated
/// to `depth` coordinates.
class SumSpace {
 public:
  SumSpace(std::vector<TwoPieceFactor> pattern, std::size_t depth);
  std::size_t depth() const { return depth_; }
  const TwoPieceFactor& factor(std::size_t alpha) const { return pattern_[alpha % pattern_.size()]; }
  const FactorSpace& piece(std::size_t alpha, int which) const;

 private:
  std::vector<TwoPieceFactor> pattern_;
  std::size_t depth_;
};

/// Coordinates below the depth are listed; every later coordinate is the
/// origin of piece 0, so the component of a point is known exactly.
struct SumPoint {
  std::vector<int> pieces;
  std::vector<FactorPoint> values;
};

void check_sum_point(const SumSpace& space, const SumPoint& p);

/// f with p in C_f = prod X_{alpha, f(alpha)}, over the evaluated coordinates.
std::vector<int> component_key(const SumSpace& space, const SumPoint& p);

/// Piece-preserving coordinatewise homeomorphism.
struct SumHomeo {
  std::map<std::size_t, std::pair<Homeo, Homeo>> maps;
  SumPoint apply(const SumSpace& space, const SumPoint& p) const;
};

/// Components go to components under a homeomorphism, so the multiset of
/// |D n C| over populated components is an invariant of finite D. A witness
/// has a component holding exactly one point of E and none holding exactly
/// one point of D.
ObstructionCertificate witness_components(const SumSpace& space, const std::vector<SumPoint>& D,
                                          const std::vector<SumPoint>& E);

struct ComponentWitness {
  std::vector<SumPoint> D;
  std::vector<SumPoint> E;
  SumPoint z;
  std::vector<int> z_key;
  ObstructionCertificate certificate;
};

/// Doubles every point of D inside its own piece, so each populated component
/// holds at least two points, then adds a point z in the first component D
/// misses. Throws PreconditionFailure when D populates every component of the
/// truncation.
ComponentWitness build_component_witness(const SumSpace& space, const std::vector<SumPoint>& D);

}  // namespace cdh
