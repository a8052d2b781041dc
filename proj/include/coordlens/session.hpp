#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordlens/bundle.hpp"
#include "coordlens/crossfilter.hpp"
#include "coordlens/error.hpp"
#include "coordlens/geometry.hpp"
#include "coordlens/heatgrid.hpp"
#include "coordlens/projection.hpp"

namespace coordlens {

namespace command {

struct SetFilter {
  std::string view;
  FilterSpec filter;
};
struct ClearFilter {
  std::string view;
};
struct ClearAll {};
struct SpatialSelect {
  std::string map;
  Geometry geometry;
};
struct ClearSpatial {
  std::string map;
};
struct RowClick {
  std::string key;
};
struct SetVariable {
  std::string map;
  std::string column;
};
struct SetProjection {
  std::string view;
  ProjectionSpec projection;
};
struct SetBinWidth {
  std::string view;
  double width = 1.0;
};
struct SetAxes {
  std::string view;
  std::string x;
  std::string y;
};
struct QueryView {
  std::string view;
};
struct QueryTable {
  RecordsQuery query;
};
struct QueryHeatmap {
  std::string map;
  HeatMode mode = HeatMode::Local;
};
struct QueryStatus {};

}  // namespace command

using Command =
    std::variant<command::SetFilter, command::ClearFilter, command::ClearAll, command::SpatialSelect,
                 command::ClearSpatial, command::RowClick, command::SetVariable, command::SetProjection,
                 command::SetBinWidth, command::SetAxes, command::QueryView, command::QueryTable,
                 command::QueryHeatmap, command::QueryStatus>;

/// Query commands leave the revision untouched; every other command bumps
/// it by exactly one when it succeeds.
bool is_state_changing(const Command& cmd);

struct StatusUpdate {
  std::uint64_t revision = 0;
  std::size_t selected = 0;
  std::size_t total = 0;
};

struct ViewUpdate {
  std::uint64_t revision = 0;
  std::string view;
  ViewKind kind = ViewKind::StatusBar;
  nlohmann::json payload;
};

struct ErrorNotice {
  std::uint64_t revision = 0;
  ErrorCode code = ErrorCode::InvalidCommand;
  std::string message;
};

using Notification = std::variant<StatusUpdate, ViewUpdate, ErrorNotice>;

/// Carries the validation report of a bundle that cannot start a session.
class BundleInvalidError : public Error {
 public:
  explicit BundleInvalidError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// One coordinated-view session over a validated bundle.
///
/// Commands are applied strictly in order by a single writer. After a state
/// change the session emits one StatusUpdate followed by a ViewUpdate for
/// every view whose payload differs from the last one pushed, in view
/// declaration order, all stamped with the new revision. A failed command
/// changes nothing and yields a single ErrorNotice.
class Session {
 public:
  /// Throws BundleInvalidError when validate_bundle reports errors.
  static Session create(std::shared_ptr<const AppBundle> bundle);

  /// Throws Error(SnapshotMismatch) when the snapshot was taken against
  /// different bundle content, Error(InvalidCommand) for a malformed one.
  static Session restore(std::shared_ptr<const AppBundle> bundle, const nlohmann::json& snapshot);

  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  ~Session();

  std::vector<Notification> dispatch(const Command& cmd);

  /// StatusUpdate plus a ViewUpdate for every registered view at the
  /// current revision; what a host renders on attach.
  std::vector<Notification> full_state() const;

  std::uint64_t revision() const noexcept;
  StatusUpdate status() const;
  /// Throws Error(UnknownView).
  ViewUpdate query_view(const std::string& view_id) const;

  nlohmann::json snapshot() const;

  const AppBundle& bundle() const noexcept;
  const Crossfilter& engine() const noexcept;
  std::vector<std::string> view_ids() const;
  /// Dimension a view filters through, if it has one.
  std::optional<DimensionId> view_dimension(const std::string& view_id) const;

 private:
  struct Impl;
  explicit Session(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace coordlens
