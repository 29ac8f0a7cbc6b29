#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace cdh {

using Vec = Eigen::VectorXd;

/// A homeomorphism of a subset of R^m known only through floating-point
/// evaluators for the map and its inverse.
class FloatHomeo {
 public:
  using Map = std::function<Vec(const Vec&)>;

  FloatHomeo(std::string name, int dimension, Map forward, Map backward, double tolerance = 1e-9);
  static FloatHomeo identity(int dimension);

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  double tolerance() const { return tolerance_; }

  Vec apply(const Vec& x) const { return forward_(x); }
  Vec apply_inverse(const Vec& x) const { return backward_(x); }
  FloatHomeo inverse() const;

  /// Largest |h(x) - x| over `samples` seeded points of the closed unit ball.
  /// This is an estimate, not a bound.
  double sampled_displacement(int samples = 4096, unsigned seed = 1) const;
  /// Largest round-trip error over the same kind of sample.
  double sampled_round_trip(int samples = 4096, unsigned seed = 1) const;

  friend FloatHomeo compose(const FloatHomeo& outer, const FloatHomeo& inner);

 private:
  std::string name_;
  int dimension_;
  Map forward_;
  Map backward_;
  double tolerance_;
};

FloatHomeo compose(const FloatHomeo& outer, const FloatHomeo& inner);

/// Seeded uniform sample of the closed unit ball of R^m.
std::vector<Vec> sample_ball(int dimension, int count, unsigned seed, double radius = 1.0);
/// Seeded uniform sample of the unit sphere of R^m.
std::vector<Vec> sample_sphere(int dimension, int count, unsigned seed);

}  // namespace cdh
