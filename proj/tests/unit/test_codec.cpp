#include <doctest.h>

#include <cmath>

#include "coordlens/codec.hpp"
#include "coordlens/error.hpp"

using namespace coordlens;
using nlohmann::json;

namespace {

ErrorCode code_of(const json& j) {
  try {
    codec::command_from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("dump is canonical") {
  const json j = {{"b", 0.1 + 0.2}, {"a", {1, 2.5, NAN}}, {"c", "x"}};
  CHECK(codec::dump(j) == R"({"a":[1,2.5,null],"b":0.3,"c":"x"})");
  CHECK(codec::dump(json(1e21)) == "1e+21");
}

TEST_CASE("filters round trip") {
  const std::vector<FilterSpec> specs = {NoFilter{}, RangeFilter{1, 2}, SetFilter{{"a", "b"}},
                                         TagAnyFilter{{"lung"}}, KeyFilter{{"k1"}}};
  for (const auto& s : specs) CHECK(codec::dump(codec::to_json(codec::filter_from_json(codec::to_json(s)))) == codec::dump(codec::to_json(s)));
  const auto dated = codec::filter_from_json({{"type", "range"}, {"lo", "1970-01-02"}, {"hi", "1970-01-05"}});
  CHECK(std::get<RangeFilter>(dated).lo == 1);
  CHECK(std::get<RangeFilter>(dated).hi == 4);
  const auto sp = codec::filter_from_json(
      {{"type", "spatial"}, {"geometry", {{"type", "Circle"}, {"center", {1, 2}}, {"radius", 10}}}});
  CHECK(std::holds_alternative<SpatialFilter>(sp));
  CHECK_THROWS_AS(codec::filter_from_json({{"type", "fuzzy"}}), Error);
}

TEST_CASE("commands round trip") {
  const std::vector<json> lines = {
      {{"cmd", "SetFilter"}, {"view", "v"}, {"filter", {{"type", "set"}, {"values", {"a"}}}}},
      {{"cmd", "ClearFilter"}, {"view", "v"}},
      {{"cmd", "ClearAll"}},
      {{"cmd", "RowClick"}, {"key", "k"}},
      {{"cmd", "SetVariable"}, {"map", "m"}, {"column", "c"}},
      {{"cmd", "SetBinWidth"}, {"view", "h"}, {"width", 2.5}},
      {{"cmd", "SetAxes"}, {"view", "s"}, {"x", "a"}, {"y", "b"}},
      {{"cmd", "QueryView"}, {"view", "v"}},
      {{"cmd", "QueryStatus"}},
      {{"cmd", "ClearSpatial"}, {"map", "m"}},
  };
  for (const json& line : lines) {
    const Command cmd = codec::command_from_json(line);
    CHECK(codec::dump(codec::to_json(codec::command_from_json(codec::to_json(cmd)))) == codec::dump(codec::to_json(cmd)));
  }
  const auto rc = codec::command_from_json({{"cmd", "RowClick"}, {"key", 42}});
  CHECK(std::get<command::RowClick>(rc).key == "42");
  const auto qt = codec::command_from_json({{"cmd", "QueryTable"}, {"sort", {{"column", "x"}, {"order", "desc"}}}});
  CHECK(std::get<command::QueryTable>(qt).query.limit == 25);
  CHECK_FALSE(std::get<command::QueryTable>(qt).query.sort->ascending);
  const auto proj = codec::command_from_json(
      {{"cmd", "SetProjection"}, {"view", "m"}, {"projection", {{"name", "albers"}, {"parallel1", 30}}}});
  CHECK(std::get<AlbersConic>(std::get<command::SetProjection>(proj).projection).parallel1 == 30);
}

TEST_CASE("malformed commands") {
  CHECK(code_of({{"cmd", "Explode"}}) == ErrorCode::InvalidCommand);
  CHECK(code_of({{"cmd", "SetFilter"}, {"view", "v"}}) == ErrorCode::InvalidCommand);
  CHECK(code_of({{"view", "v"}}) == ErrorCode::InvalidCommand);
  CHECK(code_of(json::array()) == ErrorCode::InvalidCommand);
  CHECK(code_of({{"cmd", "SetProjection"}, {"view", "m"}, {"projection", "robinson"}}) == ErrorCode::InvalidCommand);
}

TEST_CASE("notifications") {
  CHECK(codec::dump(codec::to_json(Notification{StatusUpdate{3, 10, 20}})) ==
        R"({"revision":3,"selected":10,"total":20,"type":"StatusUpdate"})");
  const auto err = codec::to_json(Notification{ErrorNotice{2, ErrorCode::UnknownView, "no view 'x'"}});
  CHECK(err["code"] == "UnknownView");
  CHECK(err["type"] == "Error");
  const auto vu = codec::to_json(Notification{ViewUpdate{1, "h", ViewKind::Histogram, json::array()}});
  CHECK(vu["kind"] == "histogram");
}

TEST_CASE("result encoders") {
  GroupResult g{{0}, {{std::string("a"), 2.0}, {std::string("b"), 1.0}}};
  CHECK(codec::dump(codec::to_json(g)) == R"([["a",2],["b",1]])");
  CHECK(codec::to_json(ClassBreaks{ClassMethod::Jenks, 2, {0, 1, 2}})["method"] == "jenks");
  CHECK(codec::to_json(RegressionFit{2, 1, 0.5, 4})["n"] == 4);
  CHECK(codec::to_json(BoxplotStats{})["outliers"].is_array());
}
