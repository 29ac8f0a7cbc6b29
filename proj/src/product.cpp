#include "cdh/product.hpp"

#include "cdh/errors.hpp"

namespace cdh {

ProductSpace::ProductSpace(std::vector<FactorSpace> factors, bool infinite, std::size_t depth)
    : factors_(std::move(factors)), infinite_(infinite), depth_(depth) {}

ProductSpace ProductSpace::finite(std::vector<FactorSpace> factors) {
  const std::size_t n = factors.size();
  return ProductSpace(std::move(factors), false, n);
}

ProductSpace ProductSpace::infinite(std::vector<FactorSpace> pattern, std::size_t working_depth) {
  if (pattern.empty()) throw PreconditionFailure("an infinite product needs a factor pattern");
  return ProductSpace(std::move(pattern), true, working_depth);
}

const FactorSpace& ProductSpace::factor(std::size_t alpha) const {
  if (infinite_) return factors_[alpha % factors_.size()];
  if (alpha >= factors_.size()) {
    throw IndexOutOfRange("index " + std::to_string(alpha) + " outside a product of " +
                          std::to_string(factors_.size()) + " factors");
  }
  return factors_[alpha];
}

Scalar ProductSpace::tail_weight(std::size_t from) const {
  Scalar out = 0;
  if (!infinite_) {
    for (std::size_t a = from; a < factors_.size(); ++a) out += pow2(-static_cast<long>(a)) * factors_[a].diameter();
    return out;
  }
  // One period of the pattern, then a geometric series over periods.
  const std::size_t p = factors_.size();
  for (std::size_t j = 0; j < p; ++j) {
    out += pow2(-static_cast<long>(from + j)) * factor(from + j).diameter();
  }
  return out / (1 - pow2(-static_cast<long>(p)));
}

bool ProductSpace::all_exact() const {
  for (const auto& f : factors_) {
    if (!f.is_exact()) return false;
  }
  return true;
}

bool ProductSpace::all_zero_dimensional() const {
  for (const auto& f : factors_) {
    if (!f.zero_dimensional()) return false;
  }
  return true;
}

CoordinatewiseMap::CoordinatewiseMap(std::map<std::size_t, Homeo> maps, std::string name)
    : maps_(std::move(maps)), name_(std::move(name)) {}

FactorPoint CoordinatewiseMap::apply(std::size_t alpha, const CoordinateOracle& input) const {
  const auto it = maps_.find(alpha);
  if (it == maps_.end()) return input(alpha);
  return it->second.apply(input(alpha));
}

ProductMapPtr CoordinatewiseMap::inverse() const {
  std::map<std::size_t, Homeo> inv;
  for (const auto& [a, h] : maps_) inv.emplace(a, h.inverse());
  return std::make_shared<CoordinatewiseMap>(std::move(inv), name_ + "^-1");
}

ConstructionRecord CoordinatewiseMap::describe() const {
  ConstructionRecord r{name_, {}};
  for (const auto& [a, h] : maps_) r.fields.emplace_back(std::to_string(a), h.family());
  return r;
}

TranslationMap::TranslationMap(ProductSpace space, std::map<std::size_t, FactorPoint> shifts)
    : space_(std::move(space)), shifts_(std::move(shifts)) {
  for (const auto& [a, c] : shifts_) {
    if (!space_.factor(a).has_group()) throw UnsupportedFactor("translation on a factor without a group");
    space_.factor(a).check_point(c);
  }
}

FactorPoint TranslationMap::apply(std::size_t alpha, const CoordinateOracle& input) const {
  const auto it = shifts_.find(alpha);
  if (it == shifts_.end()) return input(alpha);
  return space_.factor(alpha).group_product(input(alpha), it->second);
}

ProductMapPtr TranslationMap::inverse() const {
  std::map<std::size_t, FactorPoint> inv;
  for (const auto& [a, c] : shifts_) inv.emplace(a, space_.factor(a).group_inverse(c));
  return std::make_shared<TranslationMap>(space_, std::move(inv));
}

ConstructionRecord TranslationMap::describe() const {
  ConstructionRecord r{"translation", {}};
  for (const auto& [a, c] : shifts_) r.fields.emplace_back(std::to_string(a), point_to_string(c));
  return r;
}

ProductPoint::ProductPoint(std::shared_ptr<const ProductSpace> space) : space_(std::move(space)) {}

ProductPoint::ProductPoint(std::shared_ptr<const ProductSpace> space, std::vector<FactorPoint> base,
                           std::map<std::size_t, FactorPoint> overrides)
    : space_(std::move(space)), base_(std::move(base)), overrides_(std::move(overrides)) {
  for (const auto& [a, p] : overrides_) space_->factor(a).check_point(p);
}

FactorPoint ProductPoint::raw(std::size_t alpha) const {
  const FactorSpace& f = space_->factor(alpha);
  const auto it = overrides_.find(alpha);
  if (it != overrides_.end()) return it->second;
  if (!base_.empty()) return base_[alpha % base_.size()];
  return f.origin();
}

namespace {

// Evaluates coordinates through the pipeline, sharing intermediate values.
class PipelineEvaluator {
 public:
  PipelineEvaluator(const std::vector<ProductMapPtr>& pipeline, std::function<FactorPoint(std::size_t)> raw)
      : pipeline_(pipeline), raw_(std::move(raw)) {}

  FactorPoint at(std::size_t stage, std::size_t a) {
    if (stage == 0) return raw_(a);
    const auto key = std::make_pair(stage, a);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    FactorPoint v = pipeline_[stage - 1]->apply(a, [this, stage](std::size_t b) { return at(stage - 1, b); });
    memo_.emplace(key, v);
    return v;
  }

 private:
  const std::vector<ProductMapPtr>& pipeline_;
  std::function<FactorPoint(std::size_t)> raw_;
  std::map<std::pair<std::size_t, std::size_t>, FactorPoint> memo_;
};

}  // namespace

std::vector<FactorPoint> ProductPoint::eval_prefix(std::size_t n) const {
  PipelineEvaluator eval(pipeline_, [this](std::size_t a) { return raw(a); });
  std::vector<FactorPoint> out;
  out.reserve(n);
  for (std::size_t a = 0; a < n; ++a) out.push_back(eval.at(pipeline_.size(), a));
  return out;
}

FactorPoint ProductPoint::eval_coordinate(std::size_t alpha) const {
  space_->factor(alpha);
  if (pipeline_.empty()) return raw(alpha);
  PipelineEvaluator eval(pipeline_, [this](std::size_t a) { return raw(a); });
  return eval.at(pipeline_.size(), alpha);
}

ProductPoint ProductPoint::then(ProductMapPtr map) const {
  ProductPoint out = *this;
  out.pipeline_.push_back(std::move(map));
  return out;
}

ProductPoint ProductPoint::materialize(std::size_t depth) const {
  ProductPoint out(space_, base_, {});
  const auto values = eval_prefix(depth);
  for (std::size_t a = 0; a < depth; ++a) out.overrides_.emplace(a, values[a]);
  return out;
}

DistanceInterval distance(const ProductPoint& x, const ProductPoint& y, std::size_t depth) {
  if (!(*x.space() == *y.space())) throw KindMismatch("points of different product spaces");
  const ProductSpace& s = *x.space();
  const std::size_t n = s.is_infinite() ? depth : std::min(depth, s.working_depth());
  const auto xs = x.eval_prefix(n);
  const auto ys = y.eval_prefix(n);
  Scalar lower = 0;
  for (std::size_t a = 0; a < n; ++a) {
    lower += pow2(-static_cast<long>(a)) * s.factor(a).distance(xs[a], ys[a]);
  }
  return DistanceInterval{lower, lower + s.tail_weight(n)};
}

bool agree_to_depth(const ProductPoint& x, const ProductPoint& y, std::size_t depth) {
  const ProductSpace& s = *x.space();
  const std::size_t n = s.is_infinite() ? depth : std::min(depth, s.working_depth());
  const auto xs = x.eval_prefix(n);
  const auto ys = y.eval_prefix(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (!s.factor(a).same_point(xs[a], ys[a])) return false;
  }
  return true;
}

}  // namespace cdh
