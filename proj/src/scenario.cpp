#include "cdh/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cdh/convenient_pairs.hpp"
#include "cdh/engine.hpp"
#include "cdh/errors.hpp"
#include "cdh/general_position.hpp"
#include "cdh/obstructions.hpp"

namespace cdh {

namespace {

using ProductSpacePtr = std::shared_ptr<const ProductSpace>;

const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"gp-greedy", {"count"}},
      {"gp-repair", {}},
      {"wgpp", {"chunk"}},
      {"pairs-local", {"m", "n", "k", "samples", "boundary_samples", "grid"}},
      {"pairs-glue", {"x_space", "y_space", "samples"}},
      {"cdh-run", {"rounds", "min_pairs", "samples"}},
      {"verify", {"certificate"}},
      {"obstruction", {"construction", "count", "pattern", "keys"}},
  };
  return table;
}

void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ParseError("unknown field in " + where + ": " + k);
  }
}

const Json& need(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + " needs '" + key + "'");
  return j.at(key);
}

std::size_t size_param(const Json& params, const std::string& key, std::size_t fallback) {
  if (!params.contains(key)) return fallback;
  const Json& v = params.at(key);
  if (!v.is_number_unsigned()) throw ParseError("params." + key + " must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string string_param(const Json& params, const std::string& key, const std::string& fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_string()) throw ParseError("params." + key + " must be a string");
  return params.at(key).get<std::string>();
}

ProductSpacePtr space_of(const Scenario& s) {
  if (s.space.is_null()) throw ParseError(s.operation + " needs a space");
  return std::make_shared<const ProductSpace>(product_space_from_json(s.space));
}

std::size_t eval_depth(const ProductSpace& space, std::size_t depth) {
  return space.is_infinite() ? depth : std::min(depth, space.pattern().size());
}

std::string pair_name(std::size_t i, std::size_t j) { return "pair " + std::to_string(i) + "," + std::to_string(j); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---- point sets ----------------------------------------------------------------

ProductPoint point_from_coords(const ProductSpacePtr& space, const Json& coords) {
  std::map<std::size_t, FactorPoint> over;
  const auto values = coordinates_from_json(*space, coords);
  for (std::size_t a = 0; a < values.size(); ++a) over.emplace(a, values[a]);
  return ProductPoint(space, {}, std::move(over));
}

std::vector<ProductPoint> point_set(const Json& j, const ProductSpacePtr& space, std::uint64_t seed,
                                    const std::string& where) {
  if (j.is_null()) throw ParseError("scenario needs " + where);
  const std::string kind = need(j, "kind", where).is_string() ? j.at("kind").get<std::string>() : "";
  std::vector<ProductPoint> out;
  if (kind == "points") {
    require_keys(j, {"kind", "points"}, where);
    for (const auto& c : need(j, "points", where)) out.push_back(point_from_coords(space, c));
    return out;
  }
  if (kind == "random-rational") {
    require_keys(j, {"kind", "count", "denominator"}, where);
    const std::size_t count = need(j, "count", where).get<std::size_t>();
    const long q = need(j, "denominator", where).get<long>();
    if (q < 1) throw ParseError(where + ".denominator must be positive");
    if (space->is_infinite()) throw ParseError("random-rational points need a finite space");
    for (const auto& f : space->pattern()) {
      if (f.kind() != FactorKind::Circle && f.kind() != FactorKind::Line) {
        throw ParseError("random-rational points need Circle or Line factors");
      }
    }
    const std::size_t n = space->pattern().size();
    if (count > 0 && static_cast<double>(count) > std::pow(static_cast<double>(q), static_cast<double>(n))) {
      throw ParseError(where + " asks for more distinct points than the grid holds");
    }
    std::mt19937_64 rng(seed);
    std::set<std::vector<long>> seen;
    while (out.size() < count) {
      std::vector<long> c(n);
      for (auto& x : c) x = static_cast<long>(rng() % static_cast<std::uint64_t>(q));
      if (!seen.insert(c).second) continue;
      std::map<std::size_t, FactorPoint> over;
      for (std::size_t a = 0; a < n; ++a) over.emplace(a, ratio(c[a], q));
      out.emplace_back(space, std::vector<FactorPoint>{}, std::move(over));
    }
    return out;
  }
  throw ParseError(where + ".kind must be points or random-rational");
}

std::unique_ptr<DenseSet> dense_set(const Json& j, const ProductSpacePtr& space, unsigned salt,
                                    const std::string& name) {
  if (j.is_null()) return std::make_unique<CodedDenseSet>(space, salt, name);
  const std::string kind = need(j, "kind", name).is_string() ? j.at("kind").get<std::string>() : "";
  if (kind == "coded") {
    require_keys(j, {"kind", "salt"}, name);
    return std::make_unique<CodedDenseSet>(space, need(j, "salt", name).get<unsigned>(), name);
  }
  if (kind == "points") return std::make_unique<ListDenseSet>(name, point_set(j, space, 0, name));
  throw ParseError(name + ".kind must be coded or points");
}

Json points_json(const ProductSpace& space, const std::vector<ProductPoint>& pts, std::size_t depth) {
  Json arr = Json::array();
  for (const auto& p : pts) arr.push_back(coordinates_to_json(space, p.eval_prefix(depth)));
  return arr;
}

void collision_failures(const CollisionReport& report, std::vector<Failure>& failures) {
  for (const auto& c : report.pairs) {
    if (c.disagrees_everywhere()) continue;
    failures.push_back({"general-position", pair_name(c.i, c.j), "agree at coordinate " + std::to_string(c.agree.front()),
                        std::nullopt});
  }
}

// ---- random samples in balls ------------------------------------------------

Vec sample_sphere(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

Vec sample_ball(std::mt19937_64& rng, int dim, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return sample_sphere(rng, dim) * (radius * std::pow(u(rng), 1.0 / dim));
}

double gap(const FactorPoint& a, const Vec& b) { return (as_vector(a) - b).norm(); }

// ---- operations -------------------------------------------------------------------

struct Outcome {
  Json body = Json::object();
  std::vector<Failure> failures;
  std::string csv;
};

Outcome run_gp_greedy(const Scenario& s) {
  const auto space = space_of(s);
  const std::size_t count = size_param(s.params, "count", 0);
  const std::size_t depth = eval_depth(*space, s.depth);
  const auto pts = greedy_dense_gp(space, count);
  Outcome out;
  out.body = {{"space", to_json(*space)}, {"depth", depth}, {"points", points_json(*space, pts, depth)}};
  collision_failures(check_general_position(pts, depth), out.failures);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!box_contains(*space, i, pts[i])) out.failures.push_back({"box", "point " + std::to_string(i), "outside box", {}});
  }
  return out;
}

Outcome run_gp_repair(const Scenario& s) {
  const auto space = space_of(s);
  const auto pts = point_set(s.D, space, s.seed, "D");
  const std::size_t depth = eval_depth(*space, s.depth);
  const auto r = collision_repair_gpp(pts);
  Outcome out;
  Json moves = Json::array(), ledger = Json::array(), rounds = Json::array();
  for (const auto& m : r.moves) {
    const auto rec = m->describe();
    Json fields = Json::object();
    for (const auto& [k, v] : rec.fields) fields[k] = v;
    moves.push_back({{"name", rec.name}, {"fields", fields}});
  }
  Scalar total = 0;
  out.csv = "stage,displacement,inverse_step\n";
  for (const auto& e : r.ledger) {
    ledger.push_back(to_json(e));
    total += e.displacement;
    const Scalar allow = e.index == 0 ? Scalar(1) : stage_bound(e.index - 1);
    if (e.displacement > allow || e.inverse_step > allow) {
      out.failures.push_back({"ledger", "move " + std::to_string(e.index), "bound exceeded", e.index});
    }
    out.csv += std::to_string(e.index) + "," + fmt(e.displacement.get_d()) + "," + fmt(e.inverse_step.get_d()) + "\n";
  }
  for (auto c : r.collisions_per_round) rounds.push_back(c);
  if (total > 2) out.failures.push_back({"ledger", "total", "total displacement " + to_string(total) + " > 2", {}});
  collision_failures(r.final_report, out.failures);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ProductPoint back = r.image[i];
    for (auto it = r.moves.rbegin(); it != r.moves.rend(); ++it) back = back.then((*it)->inverse());
    const auto got = back.eval_prefix(depth);
    const auto orig = pts[i].eval_prefix(depth);
    for (std::size_t a = 0; a < depth; ++a) {
      if (!space->factor(a).same_point(got[a], orig[a])) {
        out.failures.push_back({"round-trip", "point " + std::to_string(i), "coordinate " + std::to_string(a), {}});
        break;
      }
    }
  }
  out.body = {{"space", to_json(*space)},
              {"depth", depth},
              {"input", points_json(*space, pts, depth)},
              {"image", points_json(*space, r.image, depth)},
              {"moves", moves},
              {"ledger", ledger},
              {"total_displacement", to_string(total)},
              {"collisions_per_round", rounds}};
  return out;
}

Outcome run_wgpp(const Scenario& s) {
  const auto space = space_of(s);
  const auto pts = point_set(s.D, space, s.seed, "D");
  const std::size_t depth = eval_depth(*space, s.depth);
  std::map<std::size_t, ConvenientPair> pairs;
  for (std::size_t a = 1; a < depth; ++a) {
    if (!space->factor(a).has_group() || !(space->factor(a) == space->factor(0))) {
      throw ParseError("wgpp scenarios use group pairs and need one group factor throughout");
    }
    pairs.emplace(a, group_pair(space->factor(a)));
  }
  const auto r = wgpp_transform(pts, pairs, depth);
  Outcome out;
  for (const auto& c : r.before.pairs) {
    const std::set<std::size_t> was(c.disagree.begin(), c.disagree.end());
    for (std::size_t a = 1; a < depth; ++a) {
      const bool changes = r.omega.count(a) && !was.count(a);
      const bool keeps = !r.omega.count(a) && was.count(a);
      if ((changes || keeps) &&
          space->factor(a).same_point(r.image[c.i].eval_coordinate(a), r.image[c.j].eval_coordinate(a))) {
        out.failures.push_back({"disagreement", pair_name(c.i, c.j), "agree at coordinate " + std::to_string(a), {}});
      }
    }
  }
  const auto inv = r.map->inverse();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto back = r.image[i].then(inv).eval_prefix(depth);
    const auto orig = pts[i].eval_prefix(depth);
    for (std::size_t a = 0; a < depth; ++a) {
      if (!space->factor(a).same_point(back[a], orig[a])) {
        out.failures.push_back({"round-trip", "point " + std::to_string(i), "coordinate " + std::to_string(a), {}});
        break;
      }
    }
  }
  std::vector<ProductPoint> materialized;
  for (const auto& p : r.image) materialized.push_back(p.materialize(depth));
  const auto plan = block_regroup(materialized, depth, {}, size_param(s.params, "chunk", 2));
  const std::string audit = audit_plan(plan, materialized, depth);
  if (!audit.empty()) out.failures.push_back({"regroup", "plan", audit, {}});
  Json blocks = Json::array();
  for (const auto& b : plan.blocks) blocks.push_back(b);
  out.body = {{"space", to_json(*space)},
              {"depth", depth},
              {"pair", "group"},
              {"omega", std::vector<std::size_t>(r.omega.begin(), r.omega.end())},
              {"input", points_json(*space, pts, depth)},
              {"image", points_json(*space, r.image, depth)},
              {"blocks", blocks}};
  return out;
}

Outcome run_pairs_local(const Scenario& s) {
  const int m = static_cast<int>(size_param(s.params, "m", 2));
  const int n = static_cast<int>(size_param(s.params, "n", 1));
  const int k = static_cast<int>(size_param(s.params, "k", 0));
  const std::size_t samples = size_param(s.params, "samples", 10000);
  const std::size_t boundary = size_param(s.params, "boundary_samples", 1000);
  const auto pair = local_pair(m, n, k);
  std::mt19937_64 rng(s.seed);
  double cancel = 0, sup = 0, fix = 0;
  std::size_t focus_violations = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec x = sample_ball(rng, m, 0.999), y = sample_ball(rng, n, 1.0), y2 = sample_ball(rng, n, 1.0);
    cancel = std::max(cancel, gap(pair.s(pair.t(x, y), y), x));
    cancel = std::max(cancel, gap(pair.t(pair.s(x, y), y), x));
    sup = std::max(sup, gap(pair.s(x, y), x));
    if ((y - y2).norm() >= 1e-3 && (as_vector(pair.s(x, y)) - as_vector(pair.s(x, y2))).norm() <= 1e-12) {
      ++focus_violations;
    }
  }
  for (std::size_t i = 0; i < boundary; ++i) {
    const Vec x = sample_sphere(rng, m), y = sample_ball(rng, n, 1.0);
    fix = std::max({fix, gap(pair.s(x, y), x), gap(pair.t(x, y), x)});
  }
  const double sup_allow = std::ldexp(1.0, -k) + s.tolerance;
  Outcome out;
  out.body = {{"m", m},
              {"n", n},
              {"k", k},
              {"provenance", pair.provenance},
              {"samples", samples},
              {"boundary_samples", boundary},
              {"certified", false},
              {"tolerance", s.tolerance},
              {"boundary_tolerance", 1e-12},
              {"max_cancellation", cancel},
              {"max_boundary_motion", fix},
              {"sup_displacement", sup},
              {"sup_allowance", sup_allow},
              {"focus_violations", focus_violations}};
  if (cancel > s.tolerance) out.failures.push_back({"cancellation", "samples", fmt(cancel), {}});
  if (fix > 1e-12) out.failures.push_back({"boundary", "samples", fmt(fix), {}});
  if (sup > sup_allow) out.failures.push_back({"displacement", "samples", fmt(sup), {}});
  if (focus_violations) out.failures.push_back({"focus", "samples", std::to_string(focus_violations), {}});
  out.csv = grid_to_csv(pair_grid(pair, static_cast<int>(size_param(s.params, "grid", 200)), static_cast<unsigned>(s.seed)));
  return out;
}

bool in_chart_closure(const GlueChart& c, const Vec& x, const Vec& y) {
  return (x - c.x_center).norm() <= c.x_radius && (y - c.y_center).norm() <= c.y_radius;
}

bool charts_disjoint(const GlueChart& a, const GlueChart& b) {
  return (a.x_center - b.x_center).norm() > a.x_radius + b.x_radius ||
         (a.y_center - b.y_center).norm() > a.y_radius + b.y_radius;
}

Json vec_json(const Vec& v) { return to_json(FactorPoint(v)); }

Vec vec_from(const Json& j) {
  if (!j.is_array()) throw ParseError("vector must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Outcome run_pairs_glue(const Scenario& s) {
  const FactorSpace X = factor_from_json(need(s.params, "x_space", "params"));
  const FactorSpace Y = factor_from_json(need(s.params, "y_space", "params"));
  if (X.is_exact() || Y.is_exact()) throw ParseError("glued pairs live on Disc or Ball factors");
  if (s.D.is_null()) throw ParseError("pairs-glue needs D");
  require_keys(s.D, {"kind", "points"}, "D");
  if (need(s.D, "kind", "D") != "pairs") throw ParseError("D.kind must be pairs");
  std::vector<std::pair<Vec, Vec>> d;
  for (const auto& p : need(s.D, "points", "D")) {
    if (!p.is_array() || p.size() != 2) throw ParseError("each D entry is [x, y]");
    d.emplace_back(vec_from(p[0]), vec_from(p[1]));
  }
  const auto g = glue_pairs(X, Y, d);
  const std::size_t samples = size_param(s.params, "samples", 1000);
  Outcome out;
  Json charts = Json::array();
  for (const auto& c : g.charts) {
    charts.push_back({{"x_center", vec_json(c.x_center)},
                      {"y_center", vec_json(c.y_center)},
                      {"x_radius", c.x_radius},
                      {"y_radius", c.y_radius},
                      {"k", c.k}});
  }
  for (std::size_t i = 0; i < g.charts.size(); ++i) {
    for (std::size_t j = i + 1; j < g.charts.size(); ++j) {
      if (!charts_disjoint(g.charts[i], g.charts[j])) out.failures.push_back({"charts", pair_name(i, j), "overlap", {}});
    }
  }
  std::mt19937_64 rng(s.seed);
  std::size_t outside = 0;
  double outside_motion = 0, cancel = 0;
  while (outside < samples) {
    const Vec x = sample_ball(rng, X.dimension(), 0.999), y = sample_ball(rng, Y.dimension(), 0.999);
    if (std::any_of(g.charts.begin(), g.charts.end(), [&](const GlueChart& c) { return in_chart_closure(c, x, y); })) {
      continue;
    }
    ++outside;
    outside_motion = std::max({outside_motion, gap(g.pair.s(x, y), x), gap(g.pair.t(x, y), x)});
  }
  for (const auto& c : g.charts) {
    for (std::size_t i = 0; i < samples / std::max<std::size_t>(g.charts.size(), 1) + 1; ++i) {
      const Vec x = c.x_center + sample_ball(rng, X.dimension(), c.x_radius);
      const Vec y = c.y_center + sample_ball(rng, Y.dimension(), c.y_radius);
      cancel = std::max({cancel, gap(g.pair.s(g.pair.t(x, y), y), x), gap(g.pair.t(g.pair.s(x, y), y), x)});
    }
  }
  std::size_t focus_violations = 0;
  for (const auto& [x, y0] : d) {
    for (const auto& [x1, y] : d) {
      for (const auto& [x2, y2] : d) {
        if ((y - y2).norm() == 0) continue;
        if ((as_vector(g.pair.s(x, y)) - as_vector(g.pair.s(x, y2))).norm() <= 1e-12) ++focus_violations;
      }
    }
  }
  if (outside_motion != 0) out.failures.push_back({"projection", "outside samples", fmt(outside_motion), {}});
  if (cancel > s.tolerance) out.failures.push_back({"cancellation", "chart samples", fmt(cancel), {}});
  if (focus_violations) out.failures.push_back({"focus", "D projections", std::to_string(focus_violations), {}});
  out.body = {{"x_space", to_json(X)},
              {"y_space", to_json(Y)},
              {"points", s.D.at("points")},
              {"charts", charts},
              {"certified", false},
              {"tolerance", s.tolerance},
              {"outside_samples", outside},
              {"outside_motion", outside_motion},
              {"max_cancellation", cancel},
              {"focus_violations", focus_violations}};
  return out;
}

Json verify_json(const VerifyReport& v) {
  Json mism = Json::array(), certs = Json::array();
  for (const auto& m : v.mismatches) {
    mism.push_back({{"d", m.d}, {"e", m.e}, {"coordinate", m.coordinate}, {"reason", m.reason}});
  }
  for (const auto& [a, f] : v.certificate_failures) certs.push_back({{"coordinate", a}, {"stage", f.stage}, {"what", f.what}});
  Json cond = nullptr;
  if (v.condition_failure) {
    cond = {{"condition", v.condition_failure->condition},
            {"witness", v.condition_failure->witness},
            {"message", v.condition_failure->message}};
  }
  return {{"depth", v.depth},
          {"checked_depth", v.checked_depth},
          {"pairs", v.pairs},
          {"mismatches", mism},
          {"certificate_failures", certs},
          {"injectivity_samples", v.injectivity_samples},
          {"injectivity_failures", v.injectivity_failures},
          {"bijection_failures", v.bijection_failures},
          {"condition_failure", cond},
          {"passed", v.passed()}};
}

Outcome run_cdh(const Scenario& s) {
  const auto space = space_of(s);
  const auto D = dense_set(s.D, space, 0, "D");
  const auto E = dense_set(s.E, space, 1, "E");
  const std::size_t rounds = size_param(s.params, "rounds", (s.budget + 2) / 3);
  const std::size_t min_pairs = size_param(s.params, "min_pairs", 0);
  const auto result = run(*D, *E, default_schedule(rounds), s.budget);
  const auto report = verify_result(result, s.depth, size_param(s.params, "samples", 256), s.seed);
  Outcome out;
  const Condition& c = result.condition;
  const std::size_t depth = report.checked_depth;
  Json coords = Json::array();
  out.csv = "coordinate,stage,displacement,inverse_step\n";
  for (const auto& [a, t] : c.tuples) {
    coords.push_back({{"alpha", a}, {"tuple", to_json(t)}});
    for (const auto& e : t.ledger()) {
      out.csv += std::to_string(a) + "," + std::to_string(e.index) + "," + fmt(e.displacement.get_d()) + "," +
                 fmt(e.inverse_step.get_d()) + "\n";
    }
  }
  Json pairs = Json::array();
  for (const auto& sp : c.sigma) {
    Json values = Json::array();
    for (std::size_t a : c.coords) {
      if (a >= depth) break;
      const FactorSpace& f = space->factor(a);
      values.push_back(Json::array(
          {a, point_to_json(f, sp.d.point.eval_coordinate(a)), point_to_json(f, sp.e.point.eval_coordinate(a))}));
    }
    pairs.push_back({{"d", sp.d.id}, {"e", sp.e.id}, {"values", values}});
  }
  Json steps = Json::array(), unmet = Json::array();
  for (const auto& st : result.steps) {
    steps.push_back({{"task", to_string(st.task)}, {"outcome", to_string(st.outcome)}, {"detail", st.detail}});
  }
  for (const auto& t : result.unmet) unmet.push_back(to_string(t));
  out.body = {{"space", to_json(*space)},
              {"D", D->name()},
              {"E", E->name()},
              {"budget", s.budget},
              {"depth", depth},
              {"coordinates", coords},
              {"pairs", pairs},
              {"steps", steps},
              {"unmet", unmet},
              {"verify", verify_json(report)}};
  for (const auto& m : report.mismatches) {
    out.failures.push_back({"pair", m.d + " -> " + m.e, m.reason + " at coordinate " + std::to_string(m.coordinate), {}});
  }
  for (const auto& [a, f] : report.certificate_failures) {
    out.failures.push_back({"ledger", "coordinate " + std::to_string(a), f.what, f.stage});
  }
  for (const auto& f : report.injectivity_failures) out.failures.push_back({"injectivity", "sample", f, {}});
  for (const auto& f : report.bijection_failures) out.failures.push_back({"bijection", "sigma", f, {}});
  if (report.condition_failure) {
    out.failures.push_back({"condition", report.condition_failure->witness, report.condition_failure->message, {}});
  }
  if (c.sigma.size() < min_pairs) {
    out.failures.push_back({"settled-pairs", "sigma",
                            std::to_string(c.sigma.size()) + " < " + std::to_string(min_pairs), {}});
  }
  return out;
}

Json symbolic_json(const SymbolicPoint& p) {
  Json j = {{"tag", p.tag == SymbolicPoint::Tag::Row ? "row" : "limit"}};
  if (p.tag == SymbolicPoint::Tag::Row) j["row"] = p.row;
  j["baire"] = word_to_string(p.baire.letters(), false);
  j["cantor"] = word_to_string(p.cantor.letters(), true);
  return j;
}

SymbolicPoint symbolic_from(const Json& j) {
  const std::string tag = need(j, "tag", "point").get<std::string>();
  const Sequence baire(word_from_string(need(j, "baire", "point").get<std::string>(), false));
  const Sequence cantor(word_from_string(need(j, "cantor", "point").get<std::string>(), true));
  if (tag == "limit") return SymbolicPoint::make_limit(baire, cantor);
  if (tag != "row") throw ParseError("point tag must be row or limit");
  const auto p = SymbolicPoint::make_row(need(j, "row", "point").get<std::size_t>(), cantor);
  if (!(p.baire == baire)) throw ParseError("row point whose Baire coordinate is not q_row");
  return p;
}

Json certificate_json(const ObstructionCertificate& c) {
  return {{"witness", c.witness},
          {"construction", c.construction},
          {"invariant", c.invariant},
          {"facts", c.facts},
          {"reason", c.reason}};
}

std::vector<TwoPieceFactor> sum_pattern(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("pattern must be a non-empty array of [piece0, piece1]");
  std::vector<TwoPieceFactor> out;
  for (const auto& f : j) {
    if (!f.is_array() || f.size() != 2) throw ParseError("each pattern entry is [piece0, piece1]");
    out.push_back({factor_from_json(f[0]), factor_from_json(f[1])});
  }
  return out;
}

Json sum_point_json(const SumPoint& p) {
  Json values = Json::array();
  for (const auto& v : p.values) values.push_back(to_json(v));
  return {{"pieces", p.pieces}, {"values", values}};
}

SumPoint sum_point_from(const SumSpace& space, const Json& j) {
  SumPoint p;
  p.pieces = need(j, "pieces", "point").get<std::vector<int>>();
  const Json& vals = need(j, "values", "point");
  if (p.pieces.size() != space.depth() || vals.size() != space.depth()) throw ParseError("point length differs from depth");
  for (std::size_t a = 0; a < vals.size(); ++a) {
    if (p.pieces[a] != 0 && p.pieces[a] != 1) throw ParseError("piece labels are 0 and 1");
    p.values.push_back(point_from_json(space.piece(a, p.pieces[a]), vals[a]));
  }
  return p;
}

Outcome run_obstruction(const Scenario& s) {
  const std::string construction = string_param(s.params, "construction", "compact-locus");
  Outcome out;
  if (construction == "compact-locus") {
    const auto [D, E] = build_compact_locus_witness(size_param(s.params, "count", 5));
    const auto cert = witness_compact_locus(D, E);
    Json dj = Json::array(), ej = Json::array();
    for (const auto& p : D) dj.push_back(symbolic_json(p));
    for (const auto& p : E) ej.push_back(symbolic_json(p));
    out.body = {{"construction", construction}, {"D", dj}, {"E", ej}, {"certificate", certificate_json(cert)}};
    if (!cert.witness) out.failures.push_back({"witness", "compact-locus", cert.reason, {}});
    return out;
  }
  if (construction == "components") {
    const Json& pattern = need(s.params, "pattern", "params");
    const SumSpace space(sum_pattern(pattern), s.depth);
    std::vector<SumPoint> D;
    for (const auto& key : need(s.params, "keys", "params")) {
      SumPoint p;
      p.pieces = key.get<std::vector<int>>();
      if (p.pieces.size() != space.depth()) throw ParseError("each key needs one piece per coordinate");
      for (std::size_t a = 0; a < space.depth(); ++a) {
        if (p.pieces[a] != 0 && p.pieces[a] != 1) throw ParseError("piece labels are 0 and 1");
        p.values.push_back(space.piece(a, p.pieces[a]).origin());
      }
      D.push_back(std::move(p));
    }
    const auto w = build_component_witness(space, D);
    Json dj = Json::array(), ej = Json::array();
    for (const auto& p : w.D) dj.push_back(sum_point_json(p));
    for (const auto& p : w.E) ej.push_back(sum_point_json(p));
    out.body = {{"construction", construction},
                {"pattern", pattern},
                {"depth", space.depth()},
                {"D", dj},
                {"E", ej},
                {"z_key", w.z_key},
                {"certificate", certificate_json(w.certificate)}};
    if (!w.certificate.witness) out.failures.push_back({"witness", "components", w.certificate.reason, {}});
    return out;
  }
  throw ParseError("params.construction must be compact-locus or components");
}

Outcome run_verify(const Scenario& s, const std::string& base_dir) {
  std::filesystem::path target = string_param(s.params, "certificate", "");
  if (target.empty()) throw ParseError("verify needs params.certificate");
  if (target.is_relative()) target = std::filesystem::path(base_dir) / target;
  const Json doc = read_document(target.string());
  const auto report = reverify_document(doc);
  Outcome out;
  out.body = {{"target_operation", report.operation},
              {"target_hash", doc.value("hash", "")},
              {"report", report.to_json()}};
  out.failures = report.failures;
  return out;
}

// ---- reverification ------------------------------------------------------------

void reverify_points_gp(const ProductSpace& space, const std::vector<std::vector<FactorPoint>>& pts,
                        ReverifyReport& r, const std::string& label) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const std::size_t n = std::min(pts[i].size(), pts[j].size());
      for (std::size_t a = 0; a < n; ++a) {
        if (space.factor(a).same_point(pts[i][a], pts[j][a])) {
          r.failures.push_back({"general-position", label + " " + pair_name(i, j),
                                "agree at coordinate " + std::to_string(a), {}});
          ++bad;
          break;
        }
      }
    }
  }
  r.entries.push_back({label + " general position", true, bad == 0, std::to_string(bad) + " colliding pairs"});
}

std::vector<std::vector<FactorPoint>> decode_points(const ProductSpace& space, const Json& arr) {
  std::vector<std::vector<FactorPoint>> out;
  for (const auto& c : arr) out.push_back(coordinates_from_json(space, c));
  return out;
}

void reverify_gp_greedy(const Json& body, ReverifyReport& r) {
  const ProductSpace space = product_space_from_json(need(body, "space", "body"));
  const auto pts = decode_points(space, need(body, "points", "body"));
  reverify_points_gp(space, pts, r, "points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto spec = basic_box(i);
    bool ok = spec.size() <= pts[i].size();
    for (std::size_t a = 0; ok && a < spec.size(); ++a) ok = basic_set_contains(space.factor(a), spec[a], pts[i][a]);
    if (!ok) r.failures.push_back({"box", "point " + std::to_string(i), "outside box", {}});
  }
  r.entries.push_back({"box membership", true, true, std::to_string(pts.size()) + " points"});
}

void reverify_gp_repair(const Json& body, ReverifyReport& r) {
  const ProductSpace space = product_space_from_json(need(body, "space", "body"));
  reverify_points_gp(space, decode_points(space, need(body, "image", "body")), r, "image");
  Scalar total = 0;
  std::size_t i = 0;
  for (const auto& ej : need(body, "ledger", "body")) {
    const StageEntry e = stage_entry_from_json(ej);
    if (e.index != i) r.failures.push_back({"ledger", "move " + std::to_string(i), "index out of sequence", i});
    const Scalar allow = e.index == 0 ? Scalar(1) : stage_bound(e.index - 1);
    const bool ok = e.displacement <= allow && e.inverse_step <= allow;
    if (!ok) r.failures.push_back({"ledger", "move " + std::to_string(e.index), "bound exceeded", e.index});
    r.entries.push_back({"move " + std::to_string(e.index), e.certified, ok, to_string(e.displacement)});
    total += e.displacement;
    ++i;
  }
  const Scalar recorded = scalar_from_json(need(body, "total_displacement", "body"));
  if (recorded != total) {
    r.failures.push_back({"ledger", "total", "recorded " + to_string(recorded) + ", entries sum to " + to_string(total), {}});
  }
  if (total > 2) r.failures.push_back({"ledger", "total", "total displacement " + to_string(total) + " > 2", {}});
  r.entries.push_back({"total displacement", true, total <= 2 && recorded == total, to_string(total)});
}

void reverify_wgpp(const Json& body, ReverifyReport& r) {
  const ProductSpace space = product_space_from_json(need(body, "space", "body"));
  const auto in = decode_points(space, need(body, "input", "body"));
  const auto img = decode_points(space, need(body, "image", "body"));
  const std::size_t depth = need(body, "depth", "body").get<std::size_t>();
  const auto omega_v = need(body, "omega", "body").get<std::vector<std::size_t>>();
  const std::set<std::size_t> omega(omega_v.begin(), omega_v.end());
  if (in.size() != img.size()) throw ParseError("input and image differ in size");
  for (const auto& p : in) {
    if (p.size() != depth) throw ParseError("points are not evaluated to the recorded depth");
  }
  for (const auto& p : img) {
    if (p.size() != depth) throw ParseError("points are not evaluated to the recorded depth");
  }
  // Group pairs: image(a) = input(a) * input(0) on Omega, unchanged elsewhere.
  std::size_t bad = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t a = 0; a < depth; ++a) {
      const FactorSpace& f = space.factor(a);
      const FactorPoint want = omega.count(a) ? f.group_product(in[i][a], in[i][0]) : in[i][a];
      if (!f.same_point(want, img[i][a])) {
        r.failures.push_back({"transform", "point " + std::to_string(i), "coordinate " + std::to_string(a), {}});
        ++bad;
      }
      const FactorPoint back = omega.count(a) ? f.group_product(img[i][a], f.group_inverse(img[i][0])) : img[i][a];
      if (!f.same_point(back, in[i][a])) {
        r.failures.push_back({"round-trip", "point " + std::to_string(i), "coordinate " + std::to_string(a), {}});
        ++bad;
      }
    }
  }
  r.entries.push_back({"transform and inverse", true, bad == 0, std::to_string(in.size()) + " points"});
  bad = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t j = i + 1; j < in.size(); ++j) {
      for (std::size_t a = 1; a < depth; ++a) {
        const FactorSpace& f = space.factor(a);
        const bool was = !f.same_point(in[i][a], in[j][a]);
        const bool is = !f.same_point(img[i][a], img[j][a]);
        if (((omega.count(a) && !was) || (!omega.count(a) && was)) && !is) {
          r.failures.push_back({"disagreement", pair_name(i, j), "agree at coordinate " + std::to_string(a), {}});
          ++bad;
        }
      }
    }
  }
  r.entries.push_back({"disagreement", true, bad == 0, std::to_string(bad) + " failures"});
  std::vector<int> owner(depth, -1);
  bad = 0;
  const Json& blocks = need(body, "blocks", "body");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto block = blocks[b].get<std::vector<std::size_t>>();
    for (std::size_t a : block) {
      if (a >= depth || owner[a] != -1) {
        r.failures.push_back({"regroup", "block " + std::to_string(b), "index " + std::to_string(a) + " reused", {}});
        ++bad;
      } else {
        owner[a] = static_cast<int>(b);
      }
    }
    for (std::size_t i = 0; i < img.size(); ++i) {
      for (std::size_t j = i + 1; j < img.size(); ++j) {
        const bool split = std::any_of(block.begin(), block.end(), [&](std::size_t a) {
          return a < depth && !space.factor(a).same_point(img[i][a], img[j][a]);
        });
        if (!split) {
          r.failures.push_back({"regroup", "block " + std::to_string(b), pair_name(i, j) + " not separated", {}});
          ++bad;
        }
      }
    }
  }
  for (std::size_t a = 0; a < depth; ++a) {
    if (owner[a] == -1) {
      r.failures.push_back({"regroup", "cover", "index " + std::to_string(a) + " in no block", {}});
      ++bad;
    }
  }
  r.entries.push_back({"regrouped general position", true, bad == 0, std::to_string(blocks.size()) + " blocks"});
}

void reverify_sampled(const Json& body, ReverifyReport& r, const std::vector<std::pair<std::string, std::string>>& checks) {
  // Each check compares a recorded quantity against a recorded allowance.
  for (const auto& [value, allow] : checks) {
    const double v = need(body, value, "body").get<double>();
    const double lim = allow.empty() ? 0.0 : need(body, allow, "body").get<double>();
    const bool ok = v <= lim;
    r.entries.push_back({value, false, ok, fmt(v) + (allow.empty() ? " (must be 0)" : " <= " + fmt(lim))});
    if (!ok) r.failures.push_back({"sampled", value, fmt(v) + " exceeds " + fmt(lim), {}});
  }
}

void reverify_pairs_glue(const Json& body, ReverifyReport& r) {
  std::vector<GlueChart> charts;
  for (const auto& c : need(body, "charts", "body")) {
    charts.push_back({vec_from(need(c, "x_center", "chart")), vec_from(need(c, "y_center", "chart")),
                      need(c, "x_radius", "chart").get<double>(), need(c, "y_radius", "chart").get<double>(),
                      need(c, "k", "chart").get<int>()});
  }
  std::size_t bad = 0;
  for (std::size_t i = 0; i < charts.size(); ++i) {
    for (std::size_t j = i + 1; j < charts.size(); ++j) {
      if (!charts_disjoint(charts[i], charts[j])) {
        r.failures.push_back({"charts", pair_name(i, j), "overlap", {}});
        ++bad;
      }
    }
  }
  r.entries.push_back({"chart disjointness", true, bad == 0, std::to_string(charts.size()) + " charts"});
  reverify_sampled(body, r, {{"outside_motion", ""}, {"max_cancellation", "tolerance"}, {"focus_violations", ""}});
}

void reverify_cdh(const Json& body, ReverifyReport& r) {
  std::map<std::size_t, ConvergenceCertificate> tuples;
  for (const auto& c : need(body, "coordinates", "body")) {
    const std::size_t a = need(c, "alpha", "coordinate").get<std::size_t>();
    auto cert = certificate_from_json(need(c, "tuple", "coordinate"));
    const auto fails = cert.reverify();
    for (const auto& f : fails) r.failures.push_back({"ledger", "coordinate " + std::to_string(a), f.what, f.stage});
    r.entries.push_back({"coordinate " + std::to_string(a), cert.certified(), fails.empty(),
                         std::to_string(cert.size()) + " stages"});
    tuples.emplace(a, std::move(cert));
  }
  std::set<std::string> ds, es;
  std::size_t bad = 0;
  for (const auto& p : need(body, "pairs", "body")) {
    const std::string d = need(p, "d", "pair").get<std::string>(), e = need(p, "e", "pair").get<std::string>();
    if (!ds.insert(d).second || !es.insert(e).second) {
      r.failures.push_back({"bijection", d + " -> " + e, "repeated point", {}});
      ++bad;
    }
    for (const auto& v : need(p, "values", "pair")) {
      if (!v.is_array() || v.size() != 3) throw ParseError("pair values are [alpha, d, e]");
      const std::size_t a = v[0].get<std::size_t>();
      const auto it = tuples.find(a);
      if (it == tuples.end()) {
        r.failures.push_back({"pair", d + " -> " + e, "coordinate " + std::to_string(a) + " has no tuple", {}});
        ++bad;
        continue;
      }
      const FactorSpace& f = it->second.space();
      const FactorPoint dv = point_from_json(f, v[1]), ev = point_from_json(f, v[2]);
      if (!f.same_point(it->second.composed().apply(dv), ev)) {
        r.failures.push_back({"pair", d + " -> " + e, "h(d) differs from sigma(d) at coordinate " + std::to_string(a), {}});
        ++bad;
      }
    }
  }
  r.entries.push_back({"settled pairs", true, bad == 0, std::to_string(ds.size()) + " pairs"});
}

void reverify_obstruction(const Json& body, ReverifyReport& r) {
  const std::string construction = need(body, "construction", "body").get<std::string>();
  const Json& recorded = need(body, "certificate", "body");
  ObstructionCertificate cert;
  if (construction == "compact-locus") {
    std::vector<SymbolicPoint> D, E;
    for (const auto& p : need(body, "D", "body")) D.push_back(symbolic_from(p));
    for (const auto& p : need(body, "E", "body")) E.push_back(symbolic_from(p));
    cert = witness_compact_locus(D, E);
  } else if (construction == "components") {
    const SumSpace space(sum_pattern(need(body, "pattern", "body")), need(body, "depth", "body").get<std::size_t>());
    std::vector<SumPoint> D, E;
    for (const auto& p : need(body, "D", "body")) D.push_back(sum_point_from(space, p));
    for (const auto& p : need(body, "E", "body")) E.push_back(sum_point_from(space, p));
    cert = witness_components(space, D, E);
  } else {
    throw ParseError("unknown construction: " + construction);
  }
  const bool same = certificate_json(cert) == recorded;
  if (!same) r.failures.push_back({"certificate", construction, "recomputed certificate differs from the record", {}});
  if (!cert.witness) r.failures.push_back({"witness", construction, cert.reason, {}});
  r.entries.push_back({"obstruction " + construction, true, same && cert.witness, cert.witness ? "witness" : cert.reason});
}

}  // namespace

// ---- scenarios ---------------------------------------------------------------------

const std::vector<std::string>& scenario_operations() {
  static const std::vector<std::string> ops = {"gp-greedy", "gp-repair",  "wgpp",   "pairs-local",
                                               "pairs-glue", "cdh-run", "verify", "obstruction"};
  return ops;
}

Json Scenario::to_json() const {
  Json j = {{"name", name}, {"operation", operation}};
  if (!space.is_null()) j["space"] = space;
  if (!D.is_null()) j["D"] = D;
  if (!E.is_null()) j["E"] = E;
  j["params"] = params;
  j["depth"] = depth;
  j["budget"] = budget;
  j["seed"] = seed;
  j["tolerance"] = tolerance;
  return j;
}

Scenario Scenario::from_json(const Json& j) {
  require_keys(j, {"name", "operation", "space", "D", "E", "params", "depth", "budget", "seed", "tolerance"},
               "scenario");
  Scenario s;
  const Json& op = need(j, "operation", "scenario");
  if (!op.is_string()) throw ParseError("operation must be a string");
  s.operation = op.get<std::string>();
  const auto& table = allowed_params();
  const auto it = table.find(s.operation);
  if (it == table.end()) throw ParseError("unknown operation: " + s.operation);
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ParseError("name must be a string");
    s.name = j.at("name").get<std::string>();
  }
  if (j.contains("space")) s.space = j.at("space");
  if (j.contains("D")) s.D = j.at("D");
  if (j.contains("E")) s.E = j.at("E");
  if (j.contains("params")) {
    require_keys(j.at("params"), it->second, "params");
    s.params = j.at("params");
  }
  auto unsigned_field = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_unsigned()) throw ParseError(std::string(key) + " must be a non-negative integer");
    target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
  };
  unsigned_field("depth", s.depth);
  unsigned_field("budget", s.budget);
  unsigned_field("seed", s.seed);
  if (j.contains("tolerance")) {
    if (!j.at("tolerance").is_number() || j.at("tolerance").get<double>() < 0) {
      throw ParseError("tolerance must be a non-negative number");
    }
    s.tolerance = j.at("tolerance").get<double>();
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Scenario::from_json(Json::parse(ss.str()));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioResult run_scenario(const Scenario& s, const std::string& base_dir) {
  Outcome out;
  try {
    if (s.operation == "gp-greedy") out = run_gp_greedy(s);
    else if (s.operation == "gp-repair") out = run_gp_repair(s);
    else if (s.operation == "wgpp") out = run_wgpp(s);
    else if (s.operation == "pairs-local") out = run_pairs_local(s);
    else if (s.operation == "pairs-glue") out = run_pairs_glue(s);
    else if (s.operation == "cdh-run") out = run_cdh(s);
    else if (s.operation == "verify") out = run_verify(s, base_dir);
    else if (s.operation == "obstruction") out = run_obstruction(s);
    else throw ParseError("unknown operation: " + s.operation);
  } catch (const ParseError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed scenario field: ") + e.what());
  } catch (const Error& e) {
    // The construction itself refused the input.
    out = Outcome{};
    out.failures.push_back({"construction", s.operation, e.what(), {}});
  }
  return ScenarioResult{make_document(s.operation, s.to_json(), out.body, out.failures), out.csv};
}

Json ReverifyReport::to_json() const {
  Json entries_json = Json::array(), fails = Json::array();
  for (const auto& e : entries) {
    entries_json.push_back({{"entry", e.entry}, {"certified", e.certified}, {"passed", e.passed}, {"detail", e.detail}});
  }
  for (const auto& f : failures) fails.push_back(cdh::to_json(f));
  return {{"operation", operation}, {"passed", passed()}, {"entries", entries_json}, {"failures", fails}};
}

ReverifyReport reverify_document(const Json& doc) {
  ReverifyReport r;
  if (!doc.is_object() || doc.value("format", "") != kDocumentFormat) throw ParseError("not a certificate document");
  if (!doc.contains("version") || doc.at("version") != kDocumentVersion) {
    throw ParseError("format version mismatch: expected " + std::to_string(kDocumentVersion));
  }
  r.operation = need(doc, "operation", "document").get<std::string>();
  if (const auto m = hash_mismatch(doc)) r.failures.push_back({"hash", "document", *m, {}});
  const Json& body = need(doc, "body", "document");
  const bool claimed_pass = need(doc, "verdict", "document") == "pass";
  try {
    if (!claimed_pass) {
      for (const auto& f : need(doc, "failures", "document")) r.failures.push_back(failure_from_json(f));
      r.entries.push_back({"recorded verdict", true, false, "the document records failures"});
    }
    if (body.empty()) return r;
    if (r.operation == "gp-greedy") reverify_gp_greedy(body, r);
    else if (r.operation == "gp-repair") reverify_gp_repair(body, r);
    else if (r.operation == "wgpp") reverify_wgpp(body, r);
    else if (r.operation == "pairs-local") {
      reverify_sampled(body, r, {{"max_cancellation", "tolerance"},
                                 {"max_boundary_motion", "boundary_tolerance"},
                                 {"sup_displacement", "sup_allowance"},
                                 {"focus_violations", ""}});
    } else if (r.operation == "pairs-glue") reverify_pairs_glue(body, r);
    else if (r.operation == "cdh-run") reverify_cdh(body, r);
    else if (r.operation == "obstruction") reverify_obstruction(body, r);
    else if (r.operation == "verify") {
      const Json& rep = need(body, "report", "body");
      const bool ok = need(rep, "passed", "report").get<bool>();
      r.entries.push_back({"nested report", true, ok, need(body, "target_hash", "body").get<std::string>()});
      if (!ok) r.failures.push_back({"nested", "report", "the verified document failed", {}});
    } else {
      throw ParseError("unknown operation: " + r.operation);
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
  return r;
}

}  // namespace cdh
