#pragma once

#include <string>

#include <json.hpp>

#include "quadm/analysis.hpp"
#include "quadm/manifold.hpp"
#include "quadm/pointsets.hpp"

namespace quadm {

using Json = nlohmann::ordered_json;

std::string version();

/// %.17g: lossless for every finite double.
std::string format_double(double x);

/// JSON text with every floating-point number printed by format_double.
std::string dump(const Json& j, int indent = 2);

/// FNV-1a 64 of the text, as 16 hex digits.
std::string config_hash(const std::string& canonical);

Json manifold_json(const Manifold& m);
Manifold manifold_from_json(const Json& j);

Json to_json(const PointSet& ps);
PointSet pointset_from_json(const Json& j);
/// One row per node: coordinates then weight.
std::string pointset_csv(const PointSet& ps);

void save_pointset(const PointSet& ps, const std::string& path);
PointSet load_pointset(const std::string& path);

Json to_json(const Partition& p);
Json to_json(const SpectrumSlice& s);
Json to_json(const WceReport& r);
Json to_json(const QnormReport& r);
Json to_json(const DiscrepancyReport& r);
Json to_json(const LevelSetReport& r);
Json to_json(const AdversarialReport& r);
Json to_json(const TransferReport& r);
Json to_json(const PerturbReport& r);
Json to_json(const ScalingResult& r);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace quadm
