#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdh/convergence.hpp"
#include "cdh/product.hpp"

namespace cdh {

/// Ordered keys keep dumps byte-identical across runs.
using Json = nlohmann::ordered_json;

inline constexpr const char* kDocumentFormat = "cdh-certificate";
inline constexpr int kDocumentVersion = 1;

// ---- codecs ----------------------------------------------------------------
// Exact scalars are "num/den" strings and vectors are arrays of doubles.
// Cantor words are bit strings, packed as "<bits>:<hex>" past 64 letters;
// other sequences are dotted words ("3.0.1"). Decoders throw ParseError.

Json to_json(const FactorSpace& f);
FactorSpace factor_from_json(const Json& j);

Json to_json(const ProductSpace& s);
ProductSpace product_space_from_json(const Json& j);

/// Without the factor, sequences use the dotted form.
Json to_json(const FactorPoint& p);
Json point_to_json(const FactorSpace& f, const FactorPoint& p);
FactorPoint point_from_json(const FactorSpace& f, const Json& j);

/// Coordinates 0..n-1 of a product point.
Json coordinates_to_json(const ProductSpace& s, const std::vector<FactorPoint>& coords);
std::vector<FactorPoint> coordinates_from_json(const ProductSpace& s, const Json& j);

/// Float maps serialize their name only and cannot be decoded.
Json to_json(const Homeo& h);
Homeo homeo_from_json(const FactorSpace& f, const Json& j);

Json to_json(const StageEntry& e);
StageEntry stage_entry_from_json(const Json& j);

Json to_json(const ConvergenceCertificate& c);
/// Restores without checking; call reverify() on the result.
ConvergenceCertificate certificate_from_json(const Json& j);

Scalar scalar_from_json(const Json& j);

// ---- documents ---------------------------------------------------------------

/// A machine-readable check failure.
struct Failure {
  std::string check;
  std::string entry;
  std::string detail;
  std::optional<std::size_t> stage;
};

Json to_json(const Failure& f);
Failure failure_from_json(const Json& j);

/// FNV-1a 64 over the compact dump, as "fnv1a64:<16 hex digits>".
std::string content_hash(const Json& j);

/// {format, version, operation, scenario, verdict, failures, body, hash}. The
/// hash covers every other field.
Json make_document(const std::string& operation, const Json& scenario, const Json& body,
                   const std::vector<Failure>& failures);

/// Recomputes the hash of a document; nullopt when it matches.
std::optional<std::string> hash_mismatch(const Json& doc);

/// Throws ParseError on malformed JSON, a foreign format or another version.
Json read_document(const std::string& path);
Json parse_document(const std::string& text);

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace cdh
