#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cdh/homeo.hpp"
#include "cdh/spaces.hpp"

namespace cdh {

/// A product of factors indexed by 0..n-1, or by omega with a repeating
/// factor pattern and a working depth (the number of coordinates that
/// constructions and checks look at).
class ProductSpace {
 public:
  static ProductSpace finite(std::vector<FactorSpace> factors);
  static ProductSpace infinite(std::vector<FactorSpace> pattern, std::size_t working_depth);
  static ProductSpace power(const FactorSpace& factor, std::size_t n) {
    return finite(std::vector<FactorSpace>(n, factor));
  }

  bool is_infinite() const { return infinite_; }
  /// n for finite products, the working depth for infinite ones.
  std::size_t working_depth() const { return depth_; }
  bool has_index(std::size_t alpha) const { return infinite_ || alpha < factors_.size(); }
  /// Throws IndexOutOfRange for indices outside a finite product.
  const FactorSpace& factor(std::size_t alpha) const;
  const std::vector<FactorSpace>& pattern() const { return factors_; }

  /// sum over alpha >= from of 2^-alpha diam(X_alpha), exactly.
  Scalar tail_weight(std::size_t from) const;

  bool all_exact() const;
  bool all_zero_dimensional() const;

  friend bool operator==(const ProductSpace& a, const ProductSpace& b) {
    return a.infinite_ == b.infinite_ && a.depth_ == b.depth_ && a.factors_ == b.factors_;
  }

 private:
  ProductSpace(std::vector<FactorSpace> factors, bool infinite, std::size_t depth);

  std::vector<FactorSpace> factors_;
  bool infinite_;
  std::size_t depth_;
};

/// A named record describing how a product map was built, for documents.
struct ConstructionRecord {
  std::string name;
  std::vector<std::pair<std::string, std::string>> fields;
};

using CoordinateOracle = std::function<FactorPoint(std::size_t)>;

/// A homeomorphism of a product, evaluated one coordinate at a time. The
/// oracle gives coordinates of the input point.
class ProductMap {
 public:
  virtual ~ProductMap() = default;
  virtual FactorPoint apply(std::size_t alpha, const CoordinateOracle& input) const = 0;
  virtual std::shared_ptr<const ProductMap> inverse() const = 0;
  virtual ConstructionRecord describe() const = 0;
};

using ProductMapPtr = std::shared_ptr<const ProductMap>;

/// Applies a factor homeomorphism at each listed coordinate.
class CoordinatewiseMap : public ProductMap {
 public:
  explicit CoordinatewiseMap(std::map<std::size_t, Homeo> maps, std::string name = "coordinatewise");
  FactorPoint apply(std::size_t alpha, const CoordinateOracle& input) const override;
  ProductMapPtr inverse() const override;
  ConstructionRecord describe() const override;
  const std::map<std::size_t, Homeo>& maps() const { return maps_; }

 private:
  std::map<std::size_t, Homeo> maps_;
  std::string name_;
};

/// x(alpha) -> x(alpha) * c(alpha) in the factor group, for listed alpha.
class TranslationMap : public ProductMap {
 public:
  TranslationMap(ProductSpace space, std::map<std::size_t, FactorPoint> shifts);
  FactorPoint apply(std::size_t alpha, const CoordinateOracle& input) const override;
  ProductMapPtr inverse() const override;
  ConstructionRecord describe() const override;

 private:
  ProductSpace space_;
  std::map<std::size_t, FactorPoint> shifts_;
};

/// A point of a product: a base pattern repeated over the indices, finitely
/// many overrides, and a pipeline of product maps applied in order.
class ProductPoint {
 public:
  /// The point whose every coordinate is the factor origin.
  explicit ProductPoint(std::shared_ptr<const ProductSpace> space);
  ProductPoint(std::shared_ptr<const ProductSpace> space, std::vector<FactorPoint> base,
               std::map<std::size_t, FactorPoint> overrides);

  const std::shared_ptr<const ProductSpace>& space() const { return space_; }
  const std::vector<FactorPoint>& base() const { return base_; }
  const std::map<std::size_t, FactorPoint>& overrides() const { return overrides_; }
  const std::vector<ProductMapPtr>& pipeline() const { return pipeline_; }

  /// Coordinate alpha of the image of the point under the pipeline. Exact kinds
  /// ignore eps; float maps are evaluated to their own tolerance.
  FactorPoint eval_coordinate(std::size_t alpha) const;
  /// Coordinates 0..n-1 in one pass (shares work between coordinates).
  std::vector<FactorPoint> eval_prefix(std::size_t n) const;

  ProductPoint then(ProductMapPtr map) const;
  /// Same point with an empty pipeline and overrides for coordinates < depth;
  /// exact only when the pipeline changes nothing at or beyond depth.
  ProductPoint materialize(std::size_t depth) const;

 private:
  FactorPoint raw(std::size_t alpha) const;

  std::shared_ptr<const ProductSpace> space_;
  std::vector<FactorPoint> base_;
  std::map<std::size_t, FactorPoint> overrides_;
  std::vector<ProductMapPtr> pipeline_;
};

struct DistanceInterval {
  Scalar lower;
  Scalar upper;
};

/// Encloses d*(x, y) = sum 2^-alpha d_alpha(x(alpha), y(alpha)) using the
/// coordinates below depth; the width is the exact tail weight.
DistanceInterval distance(const ProductPoint& x, const ProductPoint& y, std::size_t depth);

/// True when every coordinate below depth agrees (exactly, or within the
/// factor tolerance for float kinds).
bool agree_to_depth(const ProductPoint& x, const ProductPoint& y, std::size_t depth);

}  // namespace cdh
