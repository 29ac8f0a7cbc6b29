#include "cdh/float_homeo.hpp"

#include <cmath>
#include <random>

#include "cdh/errors.hpp"

namespace cdh {

FloatHomeo::FloatHomeo(std::string name, int dimension, Map forward, Map backward, double tolerance)
    : name_(std::move(name)),
      dimension_(dimension),
      forward_(std::move(forward)),
      backward_(std::move(backward)),
      tolerance_(tolerance) {}

FloatHomeo FloatHomeo::identity(int dimension) {
  auto id = [](const Vec& x) { return x; };
  return FloatHomeo("identity", dimension, id, id, 0.0);
}

FloatHomeo FloatHomeo::inverse() const {
  return FloatHomeo(name_ + "^-1", dimension_, backward_, forward_, tolerance_);
}

FloatHomeo compose(const FloatHomeo& outer, const FloatHomeo& inner) {
  if (outer.dimension_ != inner.dimension_) throw KindMismatch("composing maps of different dimension");
  auto f = outer.forward_;
  auto g = inner.forward_;
  auto fi = outer.backward_;
  auto gi = inner.backward_;
  return FloatHomeo(
      outer.name_ + "*" + inner.name_, outer.dimension_, [f, g](const Vec& x) { return f(g(x)); },
      [fi, gi](const Vec& x) { return gi(fi(x)); }, outer.tolerance_ + inner.tolerance_);
}

double FloatHomeo::sampled_displacement(int samples, unsigned seed) const {
  double best = 0;
  for (const auto& x : sample_ball(dimension_, samples, seed)) best = std::max(best, (apply(x) - x).norm());
  return best;
}

double FloatHomeo::sampled_round_trip(int samples, unsigned seed) const {
  double best = 0;
  for (const auto& x : sample_ball(dimension_, samples, seed)) {
    best = std::max(best, (apply_inverse(apply(x)) - x).norm());
    best = std::max(best, (apply(apply_inverse(x)) - x).norm());
  }
  return best;
}

std::vector<Vec> sample_sphere(int dimension, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    Vec v(dimension);
    for (int i = 0; i < dimension; ++i) v[i] = normal(rng);
    const double n = v.norm();
    if (n < 1e-12) continue;
    out.push_back(v / n);
  }
  return out;
}

std::vector<Vec> sample_ball(int dimension, int count, unsigned seed, double radius) {
  auto dirs = sample_sphere(dimension, count, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& v : dirs) v *= radius * std::pow(unit(rng), 1.0 / dimension);
  return dirs;
}

}  // namespace cdh
