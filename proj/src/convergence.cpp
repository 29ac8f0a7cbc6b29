#include "cdh/convergence.hpp"

#include "cdh/errors.hpp"

namespace cdh {

namespace {

// Sampled float bounds must clear the limit by this factor.
const Scalar kFloatSafety = 2;

struct Measured {
  Scalar displacement;
  Scalar inverse_step;
  bool certified;
};

Measured measure(const Homeo& h, const Homeo& new_inverse, const Homeo& old_inverse) {
  const Bound disp = h.sup_displacement();
  const Bound step = sup_distance(new_inverse, old_inverse);
  return Measured{disp.value, step.value, disp.certified && step.certified};
}

bool within(const Scalar& value, const Scalar& bound, bool certified) {
  return certified ? value <= bound : value * kFloatSafety <= bound;
}

}  // namespace

Scalar stage_bound(std::size_t condition_index) { return pow2(-static_cast<long>(condition_index)); }

ConvergenceCertificate::ConvergenceCertificate(FactorSpace space)
    : space_(std::move(space)),
      composed_(std::make_shared<const Homeo>(Homeo::identity(space_))),
      composed_inverse_(composed_) {}

ConvergenceCertificate ConvergenceCertificate::restore(FactorSpace space, std::vector<Homeo> stages,
                                                       std::vector<StageEntry> ledger, bool sealed) {
  ConvergenceCertificate out(std::move(space));
  for (auto& h : stages) {
    check_homeo(out.space_, h);
    auto inv = std::make_shared<const Homeo>(h.inverse());
    auto stage = std::make_shared<const Homeo>(std::move(h));
    out.composed_ = std::make_shared<const Homeo>(compose(*stage, *out.composed_));
    out.composed_inverse_ = std::make_shared<const Homeo>(compose(*out.composed_inverse_, *inv));
    out.stages_.push_back(std::move(stage));
    out.inverses_.push_back(std::move(inv));
  }
  out.ledger_ = std::move(ledger);
  out.sealed_ = sealed;
  return out;
}

bool ConvergenceCertificate::certified() const {
  for (const auto& e : ledger_) {
    if (!e.certified) return false;
  }
  return true;
}

ConvergenceCertificate ConvergenceCertificate::append(Homeo h) const {
  if (sealed_) throw PreconditionFailure("certificate is sealed");
  check_homeo(space_, h);
  ConvergenceCertificate out = *this;
  auto inv = std::make_shared<const Homeo>(h.inverse());
  auto stage = std::make_shared<const Homeo>(std::move(h));
  auto new_inverse = std::make_shared<const Homeo>(compose(*composed_inverse_, *inv));
  if (!stages_.empty()) {
    const std::size_t n = stages_.size() - 1;
    const Scalar bound = stage_bound(n);
    const Measured m = measure(*stage, *new_inverse, *composed_inverse_);
    if (!within(m.displacement, bound, m.certified)) {
      throw BoundViolation(n, 1, to_string(m.displacement),
                           "stage " + std::to_string(n + 1) + " moves a point by " + to_string(m.displacement) +
                               " > 2^-" + std::to_string(n));
    }
    if (!within(m.inverse_step, bound, m.certified)) {
      throw BoundViolation(n, 2, to_string(m.inverse_step),
                           "stage " + std::to_string(n + 1) + " moves the inverse by " +
                               to_string(m.inverse_step) + " > 2^-" + std::to_string(n));
    }
    out.ledger_.push_back(StageEntry{n + 1, m.displacement, m.inverse_step, m.certified});
  }
  out.composed_ = std::make_shared<const Homeo>(compose(*stage, *composed_));
  out.composed_inverse_ = std::move(new_inverse);
  out.stages_.push_back(std::move(stage));
  out.inverses_.push_back(std::move(inv));
  return out;
}

ConvergenceCertificate ConvergenceCertificate::seal() const {
  ConvergenceCertificate out = *this;
  out.sealed_ = true;
  return out;
}

FactorPoint ConvergenceCertificate::partial_eval(const FactorPoint& x, std::size_t n) const {
  if (n >= stages_.size()) throw IndexOutOfRange("stage " + std::to_string(n) + " not recorded");
  if (n + 1 == stages_.size()) return composed_->apply(x);
  FactorPoint y = x;
  for (std::size_t i = 0; i <= n; ++i) y = stages_[i]->apply(y);
  return y;
}

FactorPoint ConvergenceCertificate::partial_inv_eval(const FactorPoint& x, std::size_t n) const {
  if (n >= stages_.size()) throw IndexOutOfRange("stage " + std::to_string(n) + " not recorded");
  if (n + 1 == stages_.size()) return composed_inverse_->apply(x);
  FactorPoint y = x;
  for (std::size_t i = n + 1; i-- > 0;) y = inverses_[i]->apply(y);
  return y;
}

std::size_t ConvergenceCertificate::choose_stage(const Scalar& eps) const {
  if (eps <= 0) throw PreconditionFailure("precision must be positive");
  std::size_t n = 0;
  while (pow2(1 - static_cast<long>(n)) >= eps) ++n;
  return std::min(n, stages_.size() - 1);
}

Scalar ConvergenceCertificate::tail_bound(std::size_t n, bool inverse) const {
  Scalar out = 0;
  for (const auto& e : ledger_) {
    if (e.index > n) out += inverse ? e.inverse_step : e.displacement;
  }
  if (!sealed_) out += pow2(1 - static_cast<long>(stages_.size() - 1));
  return out;
}

LimitValue ConvergenceCertificate::limit_eval(const FactorPoint& x, const Scalar& eps) const {
  if (stages_.empty()) return LimitValue{x, sealed_ ? Scalar(0) : space_.diameter(), 0, true};
  const std::size_t n = choose_stage(eps);
  return LimitValue{partial_eval(x, n), tail_bound(n, false), n, certified()};
}

LimitValue ConvergenceCertificate::limit_inv_eval(const FactorPoint& x, const Scalar& eps) const {
  if (stages_.empty()) return LimitValue{x, sealed_ ? Scalar(0) : space_.diameter(), 0, true};
  const std::size_t n = choose_stage(eps);
  return LimitValue{partial_inv_eval(x, n), tail_bound(n, true), n, certified()};
}

std::vector<ReverifyFailure> ConvergenceCertificate::reverify() const {
  std::vector<ReverifyFailure> out;
  if (ledger_.size() + (stages_.empty() ? 0 : 1) != stages_.size()) {
    out.push_back({ledger_.size(), "ledger has " + std::to_string(ledger_.size()) + " entries for " +
                                       std::to_string(stages_.size()) + " stages"});
    return out;
  }
  std::shared_ptr<const Homeo> inverse = std::make_shared<const Homeo>(Homeo::identity(space_));
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    auto next = std::make_shared<const Homeo>(compose(*inverse, *inverses_[i]));
    if (i > 0) {
      const StageEntry& e = ledger_[i - 1];
      const Measured m = measure(*stages_[i], *next, *inverse);
      const Scalar bound = stage_bound(i - 1);
      if (e.index != i) out.push_back({i, "ledger entry index " + std::to_string(e.index)});
      if (!within(m.displacement, bound, m.certified)) out.push_back({i, "displacement bound fails: " + to_string(m.displacement)});
      if (!within(m.inverse_step, bound, m.certified)) out.push_back({i, "inverse-step bound fails: " + to_string(m.inverse_step)});
      if (m.certified) {
        if (e.displacement != m.displacement) {
          out.push_back({i, "recorded displacement " + to_string(e.displacement) + " != " + to_string(m.displacement)});
        }
        if (e.inverse_step != m.inverse_step) {
          out.push_back({i, "recorded inverse step " + to_string(e.inverse_step) + " != " + to_string(m.inverse_step)});
        }
      }
      if (e.certified != m.certified) out.push_back({i, "certified flag differs"});
    }
    inverse = std::move(next);
  }
  return out;
}

}  // namespace cdh
