#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cdh/homeo.hpp"

namespace cdh {

/// Recorded bounds for stage h_i (i >= 1). `displacement` is
/// sup d(h_i x, x) and `inverse_step` is sup d(H_i^-1 x, H_{i-1}^-1 x); both
/// must be at most 2^-(i-1). Float stages are sampled, not certified.
struct StageEntry {
  std::size_t index = 0;
  Scalar displacement;
  Scalar inverse_step;
  bool certified = true;
};

struct LimitValue {
  FactorPoint value;
  /// Guaranteed distance to the limit (exact kinds; an estimate when the
  /// certificate holds sampled stages).
  Scalar error_bound;
  /// The N such that value = H_N(x) (or H_N^-1(x)).
  std::size_t stage = 0;
  bool certified = true;
};

struct ReverifyFailure {
  std::size_t stage;
  std::string what;
};

/// A finite sequence h_0, ..., h_n of homeomorphisms of one factor whose
/// partial compositions H_i = h_i o ... o h_0 satisfy the two displacement
/// bounds of the inductive convergence criterion, so that H_n and H_n^-1
/// converge uniformly as the sequence grows. h_0 is unrestricted.
///
/// Values are immutable; append returns a new certificate sharing stages.
class ConvergenceCertificate {
 public:
  explicit ConvergenceCertificate(FactorSpace space);

  /// Rebuilds a certificate from stored data without checking anything;
  /// follow with reverify().
  static ConvergenceCertificate restore(FactorSpace space, std::vector<Homeo> stages,
                                        std::vector<StageEntry> ledger, bool sealed);

  const FactorSpace& space() const { return space_; }
  std::size_t size() const { return stages_.size(); }
  bool empty() const { return stages_.empty(); }
  const Homeo& stage(std::size_t i) const { return *stages_.at(i); }
  const std::vector<StageEntry>& ledger() const { return ledger_; }
  bool sealed() const { return sealed_; }
  bool certified() const;

  /// Throws BoundViolation naming the condition index n = size() - 1 when the
  /// new stage breaks either bound; h_0 is always accepted.
  ConvergenceCertificate append(Homeo h) const;

  /// Declares that the sequence ends here (all later stages are identities).
  ConvergenceCertificate seal() const;

  /// H_n and H_n^-1 for the last stage n (identity when empty).
  const Homeo& composed() const { return *composed_; }
  const Homeo& composed_inverse() const { return *composed_inverse_; }

  /// H_N(x) and H_N^-1(x) by stagewise application; N < size().
  FactorPoint partial_eval(const FactorPoint& x, std::size_t n) const;
  FactorPoint partial_inv_eval(const FactorPoint& x, std::size_t n) const;

  /// Smallest N with 2^-(N-1) < eps, capped at the last stage, and H_N(x)
  /// with a guaranteed distance to the limit.
  LimitValue limit_eval(const FactorPoint& x, const Scalar& eps) const;
  LimitValue limit_inv_eval(const FactorPoint& x, const Scalar& eps) const;

  /// Recomputes every ledger entry from the stages and checks both bounds and
  /// agreement with the recorded values.
  std::vector<ReverifyFailure> reverify() const;

 private:
  std::size_t choose_stage(const Scalar& eps) const;
  Scalar tail_bound(std::size_t n, bool inverse) const;

  FactorSpace space_;
  std::vector<std::shared_ptr<const Homeo>> stages_;
  std::vector<std::shared_ptr<const Homeo>> inverses_;
  std::vector<StageEntry> ledger_;
  std::shared_ptr<const Homeo> composed_;
  std::shared_ptr<const Homeo> composed_inverse_;
  bool sealed_ = false;
};

/// The bound 2^-n on stage n + 1, with the float safety factor applied by the
/// caller.
Scalar stage_bound(std::size_t condition_index);

}  // namespace cdh
