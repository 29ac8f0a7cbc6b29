#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdh/convergence.hpp"
#include "cdh/product.hpp"

namespace cdh {

/// A per-factor tuple (h_0, ..., h_n) with its bound ledger.
using SuitableTuple = ConvergenceCertificate;

/// An element of a countable dense set, with a stable identifier.
struct DensePoint {
  std::string id;
  ProductPoint point;
};

/// Basic open box: the cylinder [w] at each listed coordinate.
using Box = std::map<std::size_t, Word>;

bool box_contains(const Box& box, const ProductPoint& p);
std::string box_to_string(const Box& box, const ProductSpace& space);

/// An enumerated countable dense subset of a product of sequence spaces.
class DenseSet {
 public:
  virtual ~DenseSet() = default;
  virtual std::shared_ptr<const ProductSpace> space() const = 0;
  virtual std::string name() const = 0;
  /// Length of the enumeration, nullopt when it is infinite.
  virtual std::optional<std::size_t> size() const = 0;
  virtual DensePoint at(std::size_t i) const = 0;
  /// Some element in the box whose id is not in `used`. The default knows
  /// nothing beyond the enumeration and returns nullopt.
  virtual std::optional<DensePoint> locate(const Box& box, const std::set<std::string>& used) const;
};

/// A finite list, e.g. read from a scenario or produced by greedy_dense_gp.
class ListDenseSet : public DenseSet {
 public:
  ListDenseSet(std::string name, std::vector<ProductPoint> points);
  std::shared_ptr<const ProductSpace> space() const override;
  std::string name() const override { return name_; }
  std::optional<std::size_t> size() const override { return points_.size(); }
  DensePoint at(std::size_t i) const override;

 private:
  std::string name_;
  std::vector<ProductPoint> points_;
};

/// The set {x_K : K a finite list of words}, where
/// x_K(a) = K[a] . T(K) (K[a] empty past the end of K) and T(K) is a
/// suffix-free code of (salt, K). Suffix-freeness makes any two points differ
/// at every coordinate, and two sets with different salts are disjoint with
/// union in general position. x_K lies in the box given by K, so the set is
/// dense and the locator answers every box directly. The enumeration is
/// i -> K(i), with K(i) read off basic_box(i); it is a bijection onto all keys,
/// although a located key usually has an index far beyond 64 bits.
class CodedDenseSet : public DenseSet {
 public:
  CodedDenseSet(std::shared_ptr<const ProductSpace> space, unsigned salt, std::string name);
  std::shared_ptr<const ProductSpace> space() const override { return space_; }
  std::string name() const override { return name_; }
  std::optional<std::size_t> size() const override { return std::nullopt; }
  DensePoint at(std::size_t i) const override;
  std::optional<DensePoint> locate(const Box& box, const std::set<std::string>& used) const override;

  std::vector<Word> key(std::size_t i) const;
  DensePoint point(const std::vector<Word>& key) const;
  Word tag(const std::vector<Word>& key) const;

 private:
  std::shared_ptr<const ProductSpace> space_;
  unsigned salt_;
  std::string name_;
};

struct SettledPair {
  DensePoint d;
  DensePoint e;
};

/// A condition (F, zeta, sigma).
struct Condition {
  std::shared_ptr<const ProductSpace> space;
  std::set<std::size_t> coords;
  std::map<std::size_t, SuitableTuple> tuples;
  std::vector<SettledPair> sigma;

  bool in_domain(const std::string& id) const;
  bool in_range(const std::string& id) const;
};

Condition empty_condition(std::shared_ptr<const ProductSpace> space);

struct Violation {
  int condition = 0;
  std::string witness;
  std::string message;
};

/// Membership: dom(zeta) = F, sigma injective both ways, and
/// H_alpha(d(alpha)) = sigma(d)(alpha) exactly for alpha in F.
std::optional<Violation> check_condition(const Condition& p);

/// q <= p: F grows, tuples extend, sigma extends, and every later stage fixes
/// the images settled in p.
std::optional<Violation> validate_extension(const Condition& p, const Condition& q);

/// Cylinder lengths chosen for one coordinate while meeting a Dom or Ran task.
/// The eps-ball is [x_alpha | eps_length], the delta-ball one letter longer.
struct CoordinateChoice {
  std::size_t eps_length = 0;
  std::size_t delta_length = 0;
};

struct ExtensionInfo {
  std::map<std::size_t, CoordinateChoice> choices;
  Box box;
  /// Enumeration index of the partner, or nullopt when the locator found it.
  std::optional<std::size_t> scan_index;
  std::string partner;
};

struct EngineOptions {
  /// Enumeration elements scanned for a partner before asking the locator.
  std::size_t scan_limit = 64;
};

/// Adds alpha to F with the single stage realizing d(alpha) -> sigma(d)(alpha).
/// Throws PreconditionFailure naming two settled points that share a value at
/// alpha.
Condition extend_coord(const Condition& p, std::size_t alpha);

/// Pairs d with a fresh e in the delta-box around (H_alpha(d(alpha))) and
/// appends transporters. No-op when d is already settled. Throws
/// PreconditionFailure with the box and scan depth if no partner is found.
Condition extend_dom(const Condition& p, const DensePoint& d, const DenseSet& E, const EngineOptions& options = {},
                     ExtensionInfo* info = nullptr);

/// Symmetric: pulls the box around e back through each H_alpha.
Condition extend_ran(const Condition& p, const DensePoint& e, const DenseSet& D, const EngineOptions& options = {},
                     ExtensionInfo* info = nullptr);

struct DenseTask {
  enum class Kind { Coord, Dom, Ran };
  Kind kind = Kind::Coord;
  std::size_t index = 0;  // alpha, or the enumeration index of d or e

  friend bool operator==(const DenseTask&, const DenseTask&) = default;
};

std::string to_string(const DenseTask& task);

/// Coord(0), Dom(0), Ran(0), Coord(1), ... for the given number of rounds.
std::vector<DenseTask> default_schedule(std::size_t rounds);

struct StepRecord {
  DenseTask task;
  enum class Outcome { Met, AlreadyMet, Skipped, Failed } outcome = Outcome::Met;
  std::string detail;
  ExtensionInfo info;
};

std::string to_string(StepRecord::Outcome outcome);

struct EngineResult {
  std::shared_ptr<const ProductSpace> space;
  /// The last condition of the chain, with every tuple sealed.
  Condition condition;
  std::vector<StepRecord> steps;
  /// Scheduled tasks past the budget, and tasks that failed.
  std::vector<DenseTask> unmet;
  /// h = prod_alpha H_alpha, the identity off F.
  ProductMapPtr map;
};

/// Meets the scheduled tasks in order, one condition per step, each checked
/// against its predecessor. Coord tasks outside the working depth are skipped.
EngineResult run(const DenseSet& D, const DenseSet& E, const std::vector<DenseTask>& schedule, std::size_t budget,
                 const EngineOptions& options = {});

ProductMapPtr assemble_map(const Condition& p);

struct PairMismatch {
  std::string d, e;
  std::size_t coordinate = 0;
  std::string reason;
};

struct VerifyReport {
  std::size_t depth = 0;
  /// Coordinates [checked_depth, depth) lie past the working depth and were
  /// not verified.
  std::size_t checked_depth = 0;
  std::size_t pairs = 0;
  std::vector<PairMismatch> mismatches;
  std::vector<std::pair<std::size_t, ReverifyFailure>> certificate_failures;
  std::size_t injectivity_samples = 0;
  std::vector<std::string> injectivity_failures;
  std::vector<std::string> bijection_failures;
  std::optional<Violation> condition_failure;

  bool truncated() const { return checked_depth < depth; }
  bool passed() const;
};

/// (a) h(d) = sigma(d) on coordinates below the checked depth, (b) every
/// tuple re-verifies, (c) H_alpha^-1 H_alpha x = x on sampled cylinder
/// representatives, (d) sigma is a bijection. Settled pairs only: h[D] = E is
/// a statement about the limit and is not finitely checkable.
VerifyReport verify_result(const EngineResult& result, std::size_t depth, std::size_t sample_budget,
                           unsigned long long seed = 1);

}  // namespace cdh
