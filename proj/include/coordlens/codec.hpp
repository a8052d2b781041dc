#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "coordlens/classify.hpp"
#include "coordlens/cluster.hpp"
#include "coordlens/crossfilter.hpp"
#include "coordlens/heatgrid.hpp"
#include "coordlens/projection.hpp"
#include "coordlens/session.hpp"
#include "coordlens/stats.hpp"

// JSON encoding shared by the CLI scripting format, the Python module and
// the UI embedding layer. One Command or Notification per line.
namespace coordlens::codec {

/// Compact JSON with object keys in sorted order and every float printed
/// with at most 15 significant digits; non-finite numbers become null.
std::string dump(const nlohmann::json& value);

nlohmann::json to_json(const FilterSpec& spec);
/// Range bounds may be numbers or ISO-8601 dates. Throws
/// Error(InvalidCommand) or Error(InvalidGeometry).
FilterSpec filter_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProjectionSpec& spec);
ProjectionSpec projection_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Command& cmd);
/// Throws Error(InvalidCommand) for an unknown "cmd" or missing fields.
Command command_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Notification& note);

nlohmann::json to_json(const BinKey& key);
nlohmann::json to_json(const GroupResult& group);
nlohmann::json to_json(const ClassBreaks& breaks);
nlohmann::json to_json(const HeatGrid& grid);
nlohmann::json to_json(const BoxplotStats& stats);
nlohmann::json to_json(const RegressionFit& fit);
nlohmann::json to_json(const ClusterResult& result);

}  // namespace coordlens::codec
