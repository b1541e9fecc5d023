// JSON serialization of specs and reports, and the single-line integer CSV
// format for names.  Every emitted report carries schema_version.

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "fbarlab/diagnostics.hpp"
#include "fbarlab/flow.hpp"
#include "fbarlab/roof.hpp"
#include "fbarlab/rotation.hpp"
#include "fbarlab/symbolic.hpp"
#include "fbarlab/towers.hpp"

namespace fbarlab {

inline constexpr int kSchemaVersion = 1;

using nlohmann::json;

json to_json(const RotationSpec& spec);
RotationSpec rotation_from_json(const json& j);

json to_json(const TrigPoly& p);
TrigPoly trigpoly_from_json(const json& j);

json to_json(const RoofFunction& roof);
RoofFunction roof_from_json(const json& j);

json to_json(const Box3& b);
Box3 box_from_json(const json& j);

json tower_to_json(const Box3& base, long long height);

json to_json(const GrowthReport& r);
json to_json(const MeasureEstimate& e);
json to_json(const DisjointnessCertificate& c);
json to_json(const PrecisionEstimate& e);
json to_json(const MonochromReport& r);
json to_json(const ProductTowerResult& r);
json to_json(const PaperTowersReport& r);
json to_json(const LBSchedule& s);
json to_json(const PropertyPReport& r);
json to_json(const CorrelationSeries& s);
json to_json(const CriterionReport& r);

// Words as one-line integer CSV: "1,2,3".
std::string word_to_csv(const Word& w);
Word word_from_csv(const std::string& line);
Word read_word_file(const std::string& path);
void write_word_file(const std::string& path, const Word& w);

// Reads/writes whole files; read throws InvalidInput when missing.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace fbarlab
