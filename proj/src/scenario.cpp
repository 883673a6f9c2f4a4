// Copyright 2026 The tgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tgen/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "tgen/error.hpp"
#include "tgen/log.hpp"
#include "tgen/vectorize.hpp"

namespace tgen
{

namespace
{

using nlohmann::json;

// Valid positions may leave the mapped area (e.g. long rollouts), but values
// far beyond it indicate corrupt data. Counted as warnings, not errors.
constexpr double kMapBoundsMargin = 300.0;

bool is_finite(double v) { return std::isfinite(v); }

double require_number(const json & j, const char * key, const std::string & ctx)
{
  if (!j.contains(key)) {
    throw SchemaError("missing required field '" + std::string(key) + "' in " + ctx);
  }
  if (!j[key].is_number()) {
    throw SchemaError("field '" + std::string(key) + "' in " + ctx + " is not a number");
  }
  const double v = j[key].get<double>();
  if (!is_finite(v)) {
    throw ValueError("field '" + std::string(key) + "' in " + ctx + " is not finite");
  }
  return v;
}

std::string require_string(const json & j, const char * key, const std::string & ctx)
{
  if (!j.contains(key)) {
    throw SchemaError("missing required field '" + std::string(key) + "' in " + ctx);
  }
  if (!j[key].is_string()) {
    throw SchemaError("field '" + std::string(key) + "' in " + ctx + " is not a string");
  }
  return j[key].get<std::string>();
}

const json & require_member(const json & j, const char * key, const std::string & ctx)
{
  if (!j.contains(key)) {
    throw SchemaError("missing required field '" + std::string(key) + "' in " + ctx);
  }
  return j[key];
}

int count_unknown_keys(const json & obj, const std::set<std::string> & known,
                       const std::string & ctx)
{
  int n = 0;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (known.find(it.key()) == known.end()) {
      log_debug("ignoring unknown field '" + it.key() + "' in " + ctx);
      ++n;
    }
  }
  return n;
}

void format_double(std::string & out, double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

void append_escaped(std::string & out, const std::string & s)
{
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace

const char * to_string(LaneType t)
{
  switch (t) {
    case LaneType::kCenter: return "center";
    case LaneType::kBoundarySolid: return "boundary-solid";
    case LaneType::kBoundaryBroken: return "boundary-broken";
    case LaneType::kEdge: return "edge";
  }
  return "center";
}

const char * to_string(LightState s)
{
  switch (s) {
    case LightState::kUnknown: return "unknown";
    case LightState::kGreen: return "green";
    case LightState::kYellow: return "yellow";
    case LightState::kRed: return "red";
  }
  return "unknown";
}

LaneType lane_type_from_string(const std::string & s)
{
  if (s == "center") return LaneType::kCenter;
  if (s == "boundary-solid") return LaneType::kBoundarySolid;
  if (s == "boundary-broken") return LaneType::kBoundaryBroken;
  if (s == "edge") return LaneType::kEdge;
  throw ValueError("unknown lane type '" + s + "'");
}

LightState light_state_from_string(const std::string & s)
{
  if (s == "unknown") return LightState::kUnknown;
  if (s == "green") return LightState::kGreen;
  if (s == "yellow") return LightState::kYellow;
  if (s == "red") return LightState::kRed;
  throw ValueError("unknown traffic light state '" + s + "'");
}

const Lane * LaneMap::find_lane(const std::string & id) const
{
  for (const Lane & lane : lanes) {
    if (lane.id == id) {
      return &lane;
    }
  }
  return nullptr;
}

LightState LaneMap::light_at(const std::string & lane_id, int t) const
{
  for (const TrafficLight & light : traffic_lights) {
    if (light.lane_id == lane_id && !light.states.empty()) {
      const int idx = std::clamp(t, 0, static_cast<int>(light.states.size()) - 1);
      return light.states[idx];
    }
  }
  return LightState::kUnknown;
}

void LaneMap::bounds(Vec2 & lo, Vec2 & hi) const
{
  lo = Vec2{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  hi = Vec2{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Lane & lane : lanes) {
    for (const Vec2 & p : lane.polyline) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
  }
}

int VehicleTrack::first_valid() const
{
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i].valid) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

int VehicleTrack::last_valid() const
{
  for (size_t i = states.size(); i > 0; --i) {
    if (states[i - 1].valid) {
      return static_cast<int>(i - 1);
    }
  }
  return -1;
}

const VehicleTrack * Scenario::find_track(const std::string & id) const
{
  for (const VehicleTrack & t : tracks) {
    if (t.id == id) {
      return &t;
    }
  }
  return nullptr;
}

LightState Snapshot::light_for(const std::string & lane_id) const
{
  for (const auto & [id, state] : lights) {
    if (id == lane_id) {
      return state;
    }
  }
  return LightState::kUnknown;
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

ParseResult parse_scenario(const std::string & bytes)
{
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception & e) {
    throw SchemaError(std::string("invalid document: ") + e.what());
  }
  if (!doc.is_object()) {
    throw SchemaError("top level is not an object");
  }

  ParseResult result;
  Scenario & s = result.scenario;
  int & warnings = result.warnings;

  warnings += count_unknown_keys(doc, {"dt", "ego_id", "map", "tracks"}, "document");

  s.dt = require_number(doc, "dt", "document");
  if (s.dt <= 0.0) {
    throw ValueError("dt must be positive");
  }
  s.ego_id = require_string(doc, "ego_id", "document");

  const json & jmap = require_member(doc, "map", "document");
  if (!jmap.is_object()) {
    throw SchemaError("'map' is not an object");
  }
  warnings += count_unknown_keys(jmap, {"lanes", "traffic_lights"}, "map");

  const json & jlanes = require_member(jmap, "lanes", "map");
  if (!jlanes.is_array()) {
    throw SchemaError("'map.lanes' is not an array");
  }
  std::unordered_set<std::string> lane_ids;
  for (const json & jl : jlanes) {
    if (!jl.is_object()) {
      throw SchemaError("lane entry is not an object");
    }
    Lane lane;
    lane.id = require_string(jl, "id", "lane");
    warnings += count_unknown_keys(
      jl, {"id", "type", "polyline", "successors", "left", "right"}, "lane " + lane.id);
    lane.type = lane_type_from_string(require_string(jl, "type", "lane " + lane.id));
    const json & jpoly = require_member(jl, "polyline", "lane " + lane.id);
    if (!jpoly.is_array() || jpoly.size() < 2) {
      throw ValueError("lane " + lane.id + " polyline must have at least 2 points");
    }
    for (const json & jp : jpoly) {
      if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number() || !jp[1].is_number()) {
        throw SchemaError("lane " + lane.id + " polyline point is not [x, y]");
      }
      const Vec2 p{jp[0].get<double>(), jp[1].get<double>()};
      if (!is_finite(p.x) || !is_finite(p.y)) {
        throw ValueError("lane " + lane.id + " has a non-finite polyline point");
      }
      lane.polyline.push_back(p);
    }
    if (jl.contains("successors")) {
      if (!jl["successors"].is_array()) {
        throw SchemaError("lane " + lane.id + " 'successors' is not an array");
      }
      for (const json & js : jl["successors"]) {
        if (!js.is_string()) {
          throw SchemaError("lane " + lane.id + " successor is not a string");
        }
        lane.successors.push_back(js.get<std::string>());
      }
    }
    for (const char * side : {"left", "right"}) {
      if (jl.contains(side) && !jl[side].is_null()) {
        if (!jl[side].is_string()) {
          throw SchemaError("lane " + lane.id + " '" + side + "' is not a string or null");
        }
        (side[0] == 'l' ? lane.left : lane.right) = jl[side].get<std::string>();
      }
    }
    if (!lane_ids.insert(lane.id).second) {
      throw SchemaError("duplicate lane id '" + lane.id + "'");
    }
    s.map.lanes.push_back(std::move(lane));
  }

  if (jmap.contains("traffic_lights")) {
    const json & jlights = jmap["traffic_lights"];
    if (!jlights.is_array()) {
      throw SchemaError("'map.traffic_lights' is not an array");
    }
    for (const json & jt : jlights) {
      if (!jt.is_object()) {
        throw SchemaError("traffic light entry is not an object");
      }
      TrafficLight light;
      light.lane_id = require_string(jt, "lane_id", "traffic_light");
      warnings +=
        count_unknown_keys(jt, {"lane_id", "states"}, "traffic_light " + light.lane_id);
      const json & jstates = require_member(jt, "states", "traffic_light " + light.lane_id);
      if (!jstates.is_array()) {
        throw SchemaError("traffic light states for " + light.lane_id + " is not an array");
      }
      for (const json & js : jstates) {
        if (!js.is_string()) {
          throw SchemaError("traffic light state is not a string");
        }
        light.states.push_back(light_state_from_string(js.get<std::string>()));
      }
      s.map.traffic_lights.push_back(std::move(light));
    }
  }

  const json & jtracks = require_member(doc, "tracks", "document");
  if (!jtracks.is_array()) {
    throw SchemaError("'tracks' is not an array");
  }
  std::unordered_set<std::string> track_ids;
  for (const json & jt : jtracks) {
    if (!jt.is_object()) {
      throw SchemaError("track entry is not an object");
    }
    VehicleTrack track;
    track.id = require_string(jt, "id", "track");
    warnings += count_unknown_keys(jt, {"id", "states"}, "track " + track.id);
    const json & jstates = require_member(jt, "states", "track " + track.id);
    if (!jstates.is_array() || jstates.empty()) {
      throw SchemaError("track " + track.id + " needs a non-empty state array");
    }
    for (const json & js : jstates) {
      if (!js.is_object()) {
        throw SchemaError("state entry in track " + track.id + " is not an object");
      }
      VehicleState st;
      const std::string ctx = "state of track " + track.id;
      warnings += count_unknown_keys(
        js, {"x", "y", "heading", "speed", "length", "width", "valid"}, ctx);
      st.x = require_number(js, "x", ctx);
      st.y = require_number(js, "y", ctx);
      st.heading = wrap_angle(require_number(js, "heading", ctx));
      st.speed = require_number(js, "speed", ctx);
      st.length = require_number(js, "length", ctx);
      st.width = require_number(js, "width", ctx);
      const json & jvalid = require_member(js, "valid", ctx);
      if (!jvalid.is_boolean()) {
        throw SchemaError("field 'valid' in " + ctx + " is not a boolean");
      }
      st.valid = jvalid.get<bool>();
      if (st.valid) {
        if (st.speed < 0.0) {
          throw ValueError("track " + track.id + " has negative speed");
        }
        if (st.length <= 0.0 || st.width <= 0.0) {
          throw ValueError("track " + track.id + " has non-positive size");
        }
      }
      track.states.push_back(st);
    }
    if (!track_ids.insert(track.id).second) {
      throw SchemaError("duplicate track id '" + track.id + "'");
    }
    s.tracks.push_back(std::move(track));
  }

  // Horizon: every per-step array must agree on T.
  int horizon = -1;
  auto check_horizon = [&](size_t n, const std::string & what) {
    if (horizon < 0) {
      horizon = static_cast<int>(n);
    } else if (horizon != static_cast<int>(n)) {
      throw SchemaError(what + " has " + std::to_string(n) + " steps, expected " +
                        std::to_string(horizon));
    }
  };
  for (const VehicleTrack & t : s.tracks) {
    check_horizon(t.states.size(), "track " + t.id);
  }
  for (const TrafficLight & l : s.map.traffic_lights) {
    check_horizon(l.states.size(), "traffic light " + l.lane_id);
  }
  s.horizon = horizon > 0 ? horizon : 1;

  // Size constancy over the valid steps of one track.
  for (const VehicleTrack & t : s.tracks) {
    double len = -1.0, wid = -1.0;
    for (const VehicleState & st : t.states) {
      if (!st.valid) {
        continue;
      }
      if (len < 0.0) {
        len = st.length;
        wid = st.width;
      } else if (std::abs(st.length - len) > 1e-6 || std::abs(st.width - wid) > 1e-6) {
        throw ValueError("track " + t.id + " changes size across valid steps");
      }
    }
  }

  // Reference resolution.
  if (!s.tracks.empty() || !s.ego_id.empty()) {
    if (s.find_track(s.ego_id) == nullptr && !s.tracks.empty()) {
      throw RefError("ego_id '" + s.ego_id + "' does not match any track");
    }
  }
  for (const Lane & lane : s.map.lanes) {
    for (const std::string & succ : lane.successors) {
      if (lane_ids.find(succ) == lane_ids.end()) {
        throw RefError("lane " + lane.id + " successor '" + succ + "' does not resolve");
      }
    }
    for (const std::string * n : {&lane.left, &lane.right}) {
      if (!n->empty() && lane_ids.find(*n) == lane_ids.end()) {
        throw RefError("lane " + lane.id + " neighbor '" + *n + "' does not resolve");
      }
    }
  }
  for (const TrafficLight & light : s.map.traffic_lights) {
    if (lane_ids.find(light.lane_id) == lane_ids.end()) {
      throw RefError("traffic light lane '" + light.lane_id + "' does not resolve");
    }
  }

  // Positions far outside the mapped area are suspicious but not fatal.
  if (!s.map.lanes.empty()) {
    Vec2 lo, hi;
    s.map.bounds(lo, hi);
    lo.x -= kMapBoundsMargin;
    lo.y -= kMapBoundsMargin;
    hi.x += kMapBoundsMargin;
    hi.y += kMapBoundsMargin;
    for (const VehicleTrack & t : s.tracks) {
      for (const VehicleState & st : t.states) {
        if (st.valid && (st.x < lo.x || st.x > hi.x || st.y < lo.y || st.y > hi.y)) {
          ++warnings;
        }
      }
    }
  }

  if (result.warnings > 0) {
    log_info("parsed scenario with " + std::to_string(result.warnings) + " warning(s)");
  }
  return result;
}

// ---------------------------------------------------------------------------
// write
// ---------------------------------------------------------------------------

std::string write_scenario(const Scenario & s)
{
  std::string out;
  out.reserve(4096 + s.tracks.size() * s.horizon * 96);

  out += "{\n  \"dt\": ";
  format_double(out, s.dt);
  out += ",\n  \"ego_id\": ";
  append_escaped(out, s.ego_id);
  out += ",\n  \"map\": {\n    \"lanes\": [";
  for (size_t i = 0; i < s.map.lanes.size(); ++i) {
    const Lane & lane = s.map.lanes[i];
    out += i == 0 ? "\n" : ",\n";
    out += "      {\"id\": ";
    append_escaped(out, lane.id);
    out += ", \"type\": \"";
    out += to_string(lane.type);
    out += "\", \"polyline\": [";
    for (size_t p = 0; p < lane.polyline.size(); ++p) {
      if (p > 0) {
        out += ", ";
      }
      out += '[';
      format_double(out, lane.polyline[p].x);
      out += ", ";
      format_double(out, lane.polyline[p].y);
      out += ']';
    }
    out += "], \"successors\": [";
    for (size_t p = 0; p < lane.successors.size(); ++p) {
      if (p > 0) {
        out += ", ";
      }
      append_escaped(out, lane.successors[p]);
    }
    out += "], \"left\": ";
    if (lane.left.empty()) {
      out += "null";
    } else {
      append_escaped(out, lane.left);
    }
    out += ", \"right\": ";
    if (lane.right.empty()) {
      out += "null";
    } else {
      append_escaped(out, lane.right);
    }
    out += '}';
  }
  out += s.map.lanes.empty() ? "],\n" : "\n    ],\n";
  out += "    \"traffic_lights\": [";
  for (size_t i = 0; i < s.map.traffic_lights.size(); ++i) {
    const TrafficLight & light = s.map.traffic_lights[i];
    out += i == 0 ? "\n" : ",\n";
    out += "      {\"lane_id\": ";
    append_escaped(out, light.lane_id);
    out += ", \"states\": [";
    for (size_t p = 0; p < light.states.size(); ++p) {
      if (p > 0) {
        out += ", ";
      }
      out += '"';
      out += to_string(light.states[p]);
      out += '"';
    }
    out += "]}";
  }
  out += s.map.traffic_lights.empty() ? "]\n" : "\n    ]\n";
  out += "  },\n  \"tracks\": [";
  for (size_t i = 0; i < s.tracks.size(); ++i) {
    const VehicleTrack & track = s.tracks[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"id\": ";
    append_escaped(out, track.id);
    out += ", \"states\": [";
    for (size_t p = 0; p < track.states.size(); ++p) {
      const VehicleState & st = track.states[p];
      out += p == 0 ? "\n" : ",\n";
      out += "      {\"x\": ";
      format_double(out, st.x);
      out += ", \"y\": ";
      format_double(out, st.y);
      out += ", \"heading\": ";
      format_double(out, st.heading);
      out += ", \"speed\": ";
      format_double(out, st.speed);
      out += ", \"length\": ";
      format_double(out, st.length);
      out += ", \"width\": ";
      format_double(out, st.width);
      out += ", \"valid\": ";
      out += st.valid ? "true" : "false";
      out += '}';
    }
    out += "\n    ]}";
  }
  out += s.tracks.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// equality
// ---------------------------------------------------------------------------

namespace
{

bool close(double a, double b, double rtol)
{
  return std::abs(a - b) <= rtol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool scenario_approx_equal(const Scenario & a, const Scenario & b, double rtol)
{
  if (!close(a.dt, b.dt, rtol) || a.ego_id != b.ego_id || a.horizon != b.horizon) {
    return false;
  }
  if (a.map.lanes.size() != b.map.lanes.size() ||
      a.map.traffic_lights.size() != b.map.traffic_lights.size() ||
      a.tracks.size() != b.tracks.size()) {
    return false;
  }
  for (size_t i = 0; i < a.map.lanes.size(); ++i) {
    const Lane & la = a.map.lanes[i];
    const Lane & lb = b.map.lanes[i];
    if (la.id != lb.id || la.type != lb.type || la.successors != lb.successors ||
        la.left != lb.left || la.right != lb.right ||
        la.polyline.size() != lb.polyline.size()) {
      return false;
    }
    for (size_t p = 0; p < la.polyline.size(); ++p) {
      if (!close(la.polyline[p].x, lb.polyline[p].x, rtol) ||
          !close(la.polyline[p].y, lb.polyline[p].y, rtol)) {
        return false;
      }
    }
  }
  for (size_t i = 0; i < a.map.traffic_lights.size(); ++i) {
    if (a.map.traffic_lights[i].lane_id != b.map.traffic_lights[i].lane_id ||
        a.map.traffic_lights[i].states != b.map.traffic_lights[i].states) {
      return false;
    }
  }
  for (size_t i = 0; i < a.tracks.size(); ++i) {
    const VehicleTrack & ta = a.tracks[i];
    const VehicleTrack & tb = b.tracks[i];
    if (ta.id != tb.id || ta.states.size() != tb.states.size()) {
      return false;
    }
    for (size_t p = 0; p < ta.states.size(); ++p) {
      const VehicleState & sa = ta.states[p];
      const VehicleState & sb = tb.states[p];
      if (sa.valid != sb.valid) {
        return false;
      }
      if (!close(sa.x, sb.x, rtol) || !close(sa.y, sb.y, rtol) ||
          !close(sa.heading, sb.heading, rtol) || !close(sa.speed, sb.speed, rtol) ||
          !close(sa.length, sb.length, rtol) || !close(sa.width, sb.width, rtol)) {
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// filter + crop
// ---------------------------------------------------------------------------

std::optional<Scenario> filter_and_crop(const Scenario & s, double side, int min_agents)
{
  const VehicleTrack * ego = s.find_track(s.ego_id);
  if (ego == nullptr) {
    return std::nullopt;
  }
  const int first = ego->first_valid();
  if (first < 0) {
    return std::nullopt;
  }
  const Vec2 center{ego->states[first].x, ego->states[first].y};
  const double half = 0.5 * side;
  auto inside = [&](double x, double y) {
    return std::abs(x - center.x) <= half && std::abs(y - center.y) <= half;
  };

  Scenario out;
  out.dt = s.dt;
  out.ego_id = s.ego_id;
  out.horizon = s.horizon;

  // Point-level lane clipping: contiguous runs of surviving points become
  // lanes; the first run keeps the original id so references stay stable.
  std::unordered_set<std::string> surviving;
  for (const Lane & lane : s.map.lanes) {
    std::vector<Polyline> pieces;
    Polyline cur;
    for (const Vec2 & p : lane.polyline) {
      if (inside(p.x, p.y)) {
        cur.push_back(p - center);
      } else if (!cur.empty()) {
        pieces.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) {
      pieces.push_back(std::move(cur));
    }
    int piece_no = 0;
    for (Polyline & piece : pieces) {
      if (piece.size() < 2) {
        continue;
      }
      Lane nl;
      nl.id = piece_no == 0 ? lane.id : lane.id + "#" + std::to_string(piece_no + 1);
      nl.type = lane.type;
      nl.polyline = std::move(piece);
      nl.successors = lane.successors;  // pruned below
      nl.left = lane.left;
      nl.right = lane.right;
      out.map.lanes.push_back(std::move(nl));
      ++piece_no;
    }
    if (piece_no > 0) {
      surviving.insert(lane.id);
    }
  }
  std::unordered_set<std::string> out_ids;
  for (const Lane & lane : out.map.lanes) {
    out_ids.insert(lane.id);
  }
  for (Lane & lane : out.map.lanes) {
    std::vector<std::string> kept;
    for (const std::string & succ : lane.successors) {
      if (out_ids.count(succ) > 0) {
        kept.push_back(succ);
      }
    }
    lane.successors = std::move(kept);
    if (out_ids.count(lane.left) == 0) {
      lane.left.clear();
    }
    if (out_ids.count(lane.right) == 0) {
      lane.right.clear();
    }
  }
  for (const TrafficLight & light : s.map.traffic_lights) {
    if (surviving.count(light.lane_id) > 0) {
      out.map.traffic_lights.push_back(light);
    }
  }

  for (const VehicleTrack & track : s.tracks) {
    VehicleTrack nt;
    nt.id = track.id;
    nt.states = track.states;
    int valid_count = 0;
    for (VehicleState & st : nt.states) {
      if (st.valid && !inside(st.x, st.y)) {
        st.valid = false;
      }
      st.x -= center.x;
      st.y -= center.y;
      if (st.valid) {
        ++valid_count;
      }
    }
    if (valid_count > 0) {
      out.tracks.push_back(std::move(nt));
    }
  }

  if (static_cast<int>(out.tracks.size()) < min_agents) {
    return std::nullopt;
  }
  if (out.find_track(out.ego_id) == nullptr) {
    return std::nullopt;
  }
  return out;
}

// ---------------------------------------------------------------------------
// snapshots
// ---------------------------------------------------------------------------

std::vector<Snapshot> split_snapshots(const Scenario & s, double interval)
{
  if (!(interval > 0.0)) {
    throw IntervalError("snapshot interval must be positive");
  }
  const double ratio = interval / s.dt;
  const int step = static_cast<int>(std::lround(ratio));
  if (step < 1 || std::abs(ratio - step) > 1e-6 * std::max(1.0, ratio)) {
    throw IntervalError("snapshot interval is not a multiple of dt");
  }

  const std::vector<Region> regions = chunk_lanes(s.map);

  std::vector<Snapshot> out;
  const int count = (s.horizon - 1) / step + 1;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int t = i * step;
    Snapshot snap;
    snap.map = &s.map;
    snap.timestep = t;
    for (const Lane & lane : s.map.lanes) {
      snap.lights.emplace_back(lane.id, s.map.light_at(lane.id, t));
    }
    for (const VehicleTrack & track : s.tracks) {
      if (t >= static_cast<int>(track.states.size()) || !track.states[t].valid) {
        continue;
      }
      const VehicleState & st = track.states[t];
      snap.vehicles.push_back(
        PlacedVehicle{track.id, st.x, st.y, st.heading, st.speed, st.length, st.width});
    }
    // Snapshot invariant: every vehicle passes the region validity filters.
    drop_unassignable_vehicles(snap, regions);
    out.push_back(std::move(snap));
  }
  return out;
}

}  // namespace tgen
