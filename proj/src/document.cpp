#include "cdh/document.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cdh/errors.hpp"

namespace cdh {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field: ") + key);
  return j.at(key);
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw ParseError(std::string("field is not a string: ") + key);
  return v.get<std::string>();
}

// Long binary words are packed as "<bits>:<hex>", four letters per digit.
Json word_json(const Word& w, bool binary) {
  if (!binary || w.size() <= 64) return word_to_string(w, binary);
  static const char* digits = "0123456789abcdef";
  std::string out = std::to_string(w.size()) + ":";
  for (std::size_t i = 0; i < w.size(); i += 4) {
    int v = 0;
    for (std::size_t k = 0; k < 4; ++k) v = 2 * v + (i + k < w.size() ? static_cast<int>(w[i + k]) : 0);
    out += digits[v];
  }
  return out;
}

Word word_from(const Json& j, bool binary) {
  if (!j.is_string()) throw ParseError("word is not a string");
  const std::string text = j.get<std::string>();
  const auto colon = text.find(':');
  if (!binary || colon == std::string::npos) return word_from_string(text, binary);
  std::size_t bits = 0;
  try {
    bits = std::stoul(text.substr(0, colon));
  } catch (const std::exception&) {
    throw ParseError("bad packed word: " + text.substr(0, 32));
  }
  const std::string hex = text.substr(colon + 1);
  if (hex.size() != (bits + 3) / 4) throw ParseError("packed word length mismatch");
  Word w;
  w.reserve(bits);
  for (char c : hex) {
    int v = 0;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else throw ParseError("bad hex digit in packed word");
    for (int k = 3; k >= 0; --k) {
      if (w.size() < bits) w.push_back(static_cast<Letter>((v >> k) & 1));
    }
  }
  return w;
}

}  // namespace

Scalar scalar_from_json(const Json& j) {
  if (!j.is_string()) throw ParseError("exact scalar must be a \"num/den\" string");
  return parse_scalar(j.get<std::string>());
}

// ---- spaces and points -------------------------------------------------------

Json to_json(const FactorSpace& f) {
  Json j = {{"kind", to_string(f.kind())}};
  if (!f.is_exact()) j["dim"] = f.dimension();
  return j;
}

FactorSpace factor_from_json(const Json& j) {
  const FactorKind kind = parse_factor_kind(string_field(j, "kind"));
  for (const auto& [k, v] : j.items()) {
    if (k != "kind" && k != "dim") throw ParseError("unknown factor field: " + k);
  }
  if (kind == FactorKind::Disc || kind == FactorKind::Ball) {
    const Json& d = field(j, "dim");
    if (!d.is_number_integer() || d.get<int>() < 1) throw ParseError("dim must be a positive integer");
    return FactorSpace(kind, d.get<int>());
  }
  if (j.contains("dim")) throw ParseError("dim is only meaningful for Disc and Ball");
  return FactorSpace(kind);
}

Json to_json(const ProductSpace& s) {
  Json factors = Json::array();
  for (const auto& f : s.pattern()) factors.push_back(to_json(f));
  if (s.is_infinite()) return {{"kind", "infinite"}, {"pattern", factors}, {"depth", s.working_depth()}};
  return {{"kind", "finite"}, {"factors", factors}};
}

ProductSpace product_space_from_json(const Json& j) {
  const std::string kind = string_field(j, "kind");
  auto factors_of = [](const Json& arr) {
    if (!arr.is_array() || arr.empty()) throw ParseError("factor list must be a non-empty array");
    std::vector<FactorSpace> out;
    for (const auto& f : arr) out.push_back(factor_from_json(f));
    return out;
  };
  if (kind == "finite") {
    for (const auto& [k, v] : j.items()) {
      if (k != "kind" && k != "factors") throw ParseError("unknown space field: " + k);
    }
    return ProductSpace::finite(factors_of(field(j, "factors")));
  }
  if (kind == "infinite") {
    for (const auto& [k, v] : j.items()) {
      if (k != "kind" && k != "pattern" && k != "depth") throw ParseError("unknown space field: " + k);
    }
    const Json& d = field(j, "depth");
    if (!d.is_number_unsigned()) throw ParseError("depth must be a non-negative integer");
    return ProductSpace::infinite(factors_of(field(j, "pattern")), d.get<std::size_t>());
  }
  throw ParseError("space kind must be finite or infinite, got " + kind);
}

Json to_json(const FactorPoint& p) {
  if (const auto* s = std::get_if<Sequence>(&p)) return word_to_string(s->letters(), false);
  if (const auto* q = std::get_if<Scalar>(&p)) return to_string(*q);
  Json arr = Json::array();
  const auto& v = as_vector(p);
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

FactorPoint point_from_json(const FactorSpace& f, const Json& j) {
  FactorPoint p;
  if (f.is_sequence_space()) {
    p = Sequence(word_from(j, f.alphabet() == 2));
  } else if (f.is_exact()) {
    p = scalar_from_json(j);
  } else {
    if (!j.is_array()) throw ParseError("vector point must be an array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw ParseError("vector entries must be numbers");
      v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    p = v;
  }
  try {
    f.check_point(p);
  } catch (const KindMismatch& e) {
    throw ParseError(std::string("point outside its factor: ") + e.what());
  }
  return p;
}

Json point_to_json(const FactorSpace& f, const FactorPoint& p) {
  if (const auto* s = std::get_if<Sequence>(&p)) return word_json(s->letters(), f.alphabet() == 2);
  return to_json(p);
}

Json coordinates_to_json(const ProductSpace& s, const std::vector<FactorPoint>& coords) {
  Json arr = Json::array();
  for (std::size_t a = 0; a < coords.size(); ++a) arr.push_back(point_to_json(s.factor(a), coords[a]));
  return arr;
}

std::vector<FactorPoint> coordinates_from_json(const ProductSpace& s, const Json& j) {
  if (!j.is_array()) throw ParseError("coordinates must be an array");
  std::vector<FactorPoint> out;
  for (std::size_t a = 0; a < j.size(); ++a) {
    if (!s.has_index(a)) throw ParseError("more coordinates than factors");
    out.push_back(point_from_json(s.factor(a), j[a]));
  }
  return out;
}

// ---- maps and certificates ---------------------------------------------------

Json to_json(const Homeo& h) {
  if (const auto* c = std::get_if<CylinderHomeo>(&h.rep())) {
    const bool binary = c->alphabet() == 2;
    Json rules = Json::array();
    for (const auto& r : c->rules()) {
      Json holes = Json::array();
      for (const auto& w : r.holes) holes.push_back(word_json(w, binary));
      rules.push_back({{"source", word_json(r.source, binary)}, {"target", word_json(r.target, binary)}, {"holes", holes}});
    }
    return {{"family", "cylinder"}, {"alphabet", c->alphabet()}, {"rules", rules}};
  }
  if (const auto* p = std::get_if<PLHomeo>(&h.rep())) {
    Json knots = Json::array();
    for (const auto& k : p->knots()) knots.push_back(Json::array({to_string(k.x), to_string(k.y)}));
    return {{"family", "pl"},
            {"domain", p->domain() == PLHomeo::Domain::Line ? "line" : "circle"},
            {"orientation", p->orientation()},
            {"knots", knots}};
  }
  return {{"family", "float"}, {"name", h.floating().name()}, {"dim", h.floating().dimension()}};
}

Homeo homeo_from_json(const FactorSpace& f, const Json& j) {
  const std::string family = string_field(j, "family");
  if (family == "cylinder") {
    const Json& a = field(j, "alphabet");
    if (!a.is_number_integer()) throw ParseError("alphabet must be an integer");
    const int alphabet = a.get<int>();
    if (alphabet != f.alphabet()) throw ParseError("cylinder alphabet does not match the factor");
    const bool binary = alphabet == 2;
    std::vector<CylinderRule> rules;
    for (const auto& r : field(j, "rules")) {
      CylinderRule rule{word_from(field(r, "source"), binary), word_from(field(r, "target"), binary), {}};
      for (const auto& h : field(r, "holes")) rule.holes.push_back(word_from(h, binary));
      rules.push_back(std::move(rule));
    }
    try {
      return CylinderHomeo::from_rules(alphabet, std::move(rules));
    } catch (const Error& e) {
      throw ParseError(std::string("invalid cylinder map: ") + e.what());
    }
  }
  if (family == "pl") {
    std::vector<Knot> knots;
    for (const auto& k : field(j, "knots")) {
      if (!k.is_array() || k.size() != 2) throw ParseError("knot must be [x, y]");
      knots.push_back(Knot{scalar_from_json(k[0]), scalar_from_json(k[1])});
    }
    const std::string domain = string_field(j, "domain");
    try {
      if (domain == "line") return PLHomeo::line(std::move(knots));
      if (domain == "circle") return PLHomeo::circle(std::move(knots), field(j, "orientation").get<int>());
    } catch (const Error& e) {
      throw ParseError(std::string("invalid PL map: ") + e.what());
    }
    throw ParseError("unknown PL domain: " + domain);
  }
  throw ParseError("maps of family '" + family + "' are sampled and cannot be restored");
}

Json to_json(const StageEntry& e) {
  return {{"index", e.index},
          {"displacement", to_string(e.displacement)},
          {"inverse_step", to_string(e.inverse_step)},
          {"certified", e.certified}};
}

StageEntry stage_entry_from_json(const Json& j) {
  StageEntry e;
  e.index = field(j, "index").get<std::size_t>();
  e.displacement = scalar_from_json(field(j, "displacement"));
  e.inverse_step = scalar_from_json(field(j, "inverse_step"));
  e.certified = field(j, "certified").get<bool>();
  return e;
}

Json to_json(const ConvergenceCertificate& c) {
  Json stages = Json::array(), ledger = Json::array();
  for (std::size_t i = 0; i < c.size(); ++i) stages.push_back(to_json(c.stage(i)));
  for (const auto& e : c.ledger()) ledger.push_back(to_json(e));
  return {{"factor", to_json(c.space())}, {"sealed", c.sealed()}, {"stages", stages}, {"ledger", ledger}};
}

ConvergenceCertificate certificate_from_json(const Json& j) {
  const FactorSpace f = factor_from_json(field(j, "factor"));
  std::vector<Homeo> stages;
  for (const auto& s : field(j, "stages")) stages.push_back(homeo_from_json(f, s));
  std::vector<StageEntry> ledger;
  for (const auto& e : field(j, "ledger")) ledger.push_back(stage_entry_from_json(e));
  return ConvergenceCertificate::restore(f, std::move(stages), std::move(ledger), field(j, "sealed").get<bool>());
}

// ---- documents ---------------------------------------------------------------

Json to_json(const Failure& f) {
  Json j = {{"check", f.check}, {"entry", f.entry}, {"detail", f.detail}};
  if (f.stage) j["stage"] = *f.stage;
  return j;
}

Failure failure_from_json(const Json& j) {
  Failure f{string_field(j, "check"), string_field(j, "entry"), string_field(j, "detail"), std::nullopt};
  if (j.contains("stage")) f.stage = j.at("stage").get<std::size_t>();
  return f;
}

std::string content_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json make_document(const std::string& operation, const Json& scenario, const Json& body,
                   const std::vector<Failure>& failures) {
  Json fails = Json::array();
  for (const auto& f : failures) fails.push_back(to_json(f));
  Json doc = {{"format", kDocumentFormat},
              {"version", kDocumentVersion},
              {"operation", operation},
              {"scenario", scenario},
              {"verdict", failures.empty() ? "pass" : "fail"},
              {"failures", fails},
              {"body", body}};
  doc["hash"] = content_hash(doc);
  return doc;
}

std::optional<std::string> hash_mismatch(const Json& doc) {
  if (!doc.contains("hash") || !doc.at("hash").is_string()) return std::string("document has no hash");
  Json rest = doc;
  rest.erase("hash");
  const std::string expect = content_hash(rest);
  if (expect == doc.at("hash").get<std::string>()) return std::nullopt;
  return "recorded " + doc.at("hash").get<std::string>() + ", content gives " + expect;
}

Json parse_document(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kDocumentFormat) throw ParseError("not a certificate document");
  if (!doc.contains("version") || doc.at("version") != kDocumentVersion) {
    throw ParseError("format version mismatch: expected " + std::to_string(kDocumentVersion));
  }
  for (const char* key : {"operation", "scenario", "verdict", "failures", "body"}) field(doc, key);
  return doc;
}

Json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    if (!out) throw Error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace cdh
