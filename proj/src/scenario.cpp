#include "lpvplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "lpvplan/errors.hpp"

namespace lpvplan {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

void allowKeys(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(where, "unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

// Numbers may also be given as the strings "inf" / "-inf" to drop a bound.
double bound(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(where, "expected a number or \"inf\"/\"-inf\"");
  }
  return number(j, where);
}

void read(const json& obj, const char* key, double& out, const std::string& where) {
  if (obj.contains(key)) out = number(obj.at(key), where + "." + key);
}

void readInt(const json& obj, const char* key, int& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& j = obj.at(key);
  if (!j.is_number_integer()) fail(where + "." + key, "expected an integer");
  out = j.get<int>();
}

Vec2 point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

std::vector<Vec2> points(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a list of points");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Pose2 pose(const json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 3) fail(where, "expected [x, y, heading]");
    return {number(j[0], where), number(j[1], where), number(j[2], where)};
  }
  allowKeys(j, where, {"x", "y", "heading"});
  Pose2 p;
  double x = 0.0, y = 0.0, h = 0.0;
  read(j, "x", x, where);
  read(j, "y", y, where);
  read(j, "heading", h, where);
  return {x, y, h};
}

Box2 box(const json& j, const std::string& where) {
  allowKeys(j, where, {"min", "max"});
  if (!j.contains("min") || !j.contains("max")) fail(where, "needs min and max");
  return {point(j.at("min"), where + ".min"), point(j.at("max"), where + ".max")};
}

Interval interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected [min, max]");
  return {bound(j[0], where), bound(j[1], where)};
}

void parseWorld(const json& j, Scenario& s) {
  const std::string w = "world";
  allowKeys(j, w, {"bounds", "obstacles", "legalLines", "grid", "random", "goalRegion"});
  if (j.contains("bounds")) s.bounds = box(j.at("bounds"), w + ".bounds");
  if (j.contains("obstacles")) {
    const json& obs = j.at("obstacles");
    if (!obs.is_array()) fail(w + ".obstacles", "expected a list of polygons");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      s.obstacles.push_back(points(obs[i], w + ".obstacles[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("legalLines")) {
    const json& lines = j.at("legalLines");
    if (!lines.is_array()) fail(w + ".legalLines", "expected a list of polylines");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto line = points(lines[i], w + ".legalLines[" + std::to_string(i) + "]");
      if (line.size() < 2) fail(w + ".legalLines", "a line needs two points");
      s.legalLines.push_back(std::move(line));
    }
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    allowKeys(g, w + ".grid", {"file", "origin", "resolution", "minArea"});
    if (!g.contains("file") || !g.at("file").is_string()) fail(w + ".grid.file", "expected a path");
    GridSource src;
    src.file = g.at("file").get<std::string>();
    if (g.contains("origin")) src.origin = pose(g.at("origin"), w + ".grid.origin");
    read(g, "resolution", src.resolution, w + ".grid");
    read(g, "minArea", src.minArea, w + ".grid");
    s.grid = src;
  }
  if (j.contains("random")) {
    const json& r = j.at("random");
    allowKeys(r, w + ".random", {"count", "region", "minRadius", "maxRadius", "clearance"});
    readInt(r, "count", s.random.count, w + ".random");
    if (r.contains("region")) s.random.region = box(r.at("region"), w + ".random.region");
    read(r, "minRadius", s.random.minRadius, w + ".random");
    read(r, "maxRadius", s.random.maxRadius, w + ".random");
    read(r, "clearance", s.random.clearance, w + ".random");
  }
  if (j.contains("goalRegion")) s.goalRegion = points(j.at("goalRegion"), w + ".goalRegion");
}

VehicleParams parseVehicle(const json& j) {
  if (j.is_string()) {
    try {
      return vehiclePreset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail("vehicle", e.what());
    }
  }
  allowKeys(j, "vehicle",
            {"preset", "mass", "yawInertia", "lF", "lR", "corneringStiffnessF", "corneringStiffnessR", "trackWidth",
             "halfWidth", "frontOverhang", "rearOverhang", "wheelRadius", "friction", "steerLag", "steerStop"});
  VehicleParams v = presetMax();
  if (j.contains("preset")) v = parseVehicle(j.at("preset"));
  read(j, "mass", v.mass, "vehicle");
  read(j, "yawInertia", v.yawInertia, "vehicle");
  read(j, "lF", v.lF, "vehicle");
  read(j, "lR", v.lR, "vehicle");
  read(j, "corneringStiffnessF", v.corneringStiffnessF, "vehicle");
  read(j, "corneringStiffnessR", v.corneringStiffnessR, "vehicle");
  read(j, "trackWidth", v.trackWidth, "vehicle");
  read(j, "halfWidth", v.halfWidth, "vehicle");
  read(j, "frontOverhang", v.frontOverhang, "vehicle");
  read(j, "rearOverhang", v.rearOverhang, "vehicle");
  read(j, "wheelRadius", v.wheelRadius, "vehicle");
  read(j, "friction", v.friction, "vehicle");
  read(j, "steerLag", v.steerLag, "vehicle");
  read(j, "steerStop", v.steerStop, "vehicle");
  return v;
}

ComfortProfile comfort(const json& j, const std::string& where) {
  const std::string s = j.is_string() ? j.get<std::string>() : std::string();
  if (s == "Passenger") return ComfortProfile::Passenger;
  if (s == "Empty") return ComfortProfile::Empty;
  fail(where, "expected \"Passenger\" or \"Empty\"");
}

void parseTactical(const json& j, TacticalParameters& t, const std::string& where) {
  allowKeys(j, where,
            {"outputWeights", "inputWeights", "rateWeights", "beta", "yawRate", "deltaF", "deltaR", "rateF", "rateR",
             "comfortProfile", "comfortFactor"});
  if (j.contains("outputWeights")) {
    const json& o = j.at("outputWeights");
    const std::string ow = where + ".outputWeights";
    allowKeys(o, ow, {"beta", "yawRate", "dPsi", "e"});
    read(o, "beta", t.outputWeights.beta, ow);
    read(o, "yawRate", t.outputWeights.yawRate, ow);
    read(o, "dPsi", t.outputWeights.dPsi, ow);
    read(o, "e", t.outputWeights.e, ow);
  }
  for (const auto& [key, target] : {std::pair{"inputWeights", &t.inputWeights}, std::pair{"rateWeights", &t.rateWeights}}) {
    if (!j.contains(key)) continue;
    const json& a = j.at(key);
    const std::string aw = where + "." + key;
    allowKeys(a, aw, {"front", "rear"});
    read(a, "front", target->front, aw);
    read(a, "rear", target->rear, aw);
  }
  const std::pair<const char*, Interval*> bounds[] = {{"beta", &t.beta},     {"yawRate", &t.yawRate},
                                                      {"deltaF", &t.deltaF}, {"deltaR", &t.deltaR},
                                                      {"rateF", &t.rateF},   {"rateR", &t.rateR}};
  for (const auto& [key, target] : bounds) {
    if (j.contains(key)) *target = interval(j.at(key), where + "." + key);
  }
  if (j.contains("comfortProfile")) t.comfortProfile = comfort(j.at("comfortProfile"), where + ".comfortProfile");
  read(j, "comfortFactor", t.comfortFactor, where);
}

ScenarioEvent parseEvent(const json& j, const std::string& where) {
  ScenarioEvent ev;
  if (!j.contains("type") || !j.at("type").is_string()) fail(where + ".type", "expected a string");
  const std::string type = j.at("type").get<std::string>();
  if (type == "degradation") {
    allowKeys(j, where, {"t", "type", "actuator", "angleScale", "rateScale", "source"});
    ev.type = EventType::Degradation;
    const std::string act = j.value("actuator", "");
    if (act == "front") ev.degradation.affectedActuator = Actuator::FrontSteer;
    else if (act == "rear") ev.degradation.affectedActuator = Actuator::RearSteer;
    else fail(where + ".actuator", "expected \"front\" or \"rear\"");
    const std::string src = j.value("source", "stabilization");
    if (src == "guidance") ev.degradation.source = ReportSource::Guidance;
    else if (src == "stabilization") ev.degradation.source = ReportSource::Stabilization;
    else fail(where + ".source", "expected \"guidance\" or \"stabilization\"");
    read(j, "angleScale", ev.degradation.angleScale, where);
    read(j, "rateScale", ev.degradation.rateScale, where);
  } else if (type == "forceInfeasible") {
    allowKeys(j, where, {"t", "type", "cycles"});
    ev.type = EventType::ForceInfeasible;
    readInt(j, "cycles", ev.cycles, where);
  } else {
    fail(where + ".type", "unknown event type '" + type + "'");
  }
  if (!j.contains("t")) fail(where, "missing t");
  ev.t = number(j.at("t"), where + ".t");
  return ev;
}

}  // namespace

void Scenario::validate() const {
  if (schemaVersion != kScenarioSchemaVersion) {
    throw ScenarioError("unsupported schemaVersion " + std::to_string(schemaVersion));
  }
  if (!(duration > 0.0)) throw ScenarioError("duration must be > 0");
  if (!(plantDt > 0.0) || plantDt > 0.002) throw ScenarioError("plantDt must lie in (0, 0.002]");
  try {
    mpc.validate();
    mpc.tactical.validate();
    vehicle.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  if (plantDt > mpc.Ts) throw ScenarioError("plantDt must not exceed Ts");
  if (duration + 1e-9 < mpc.Ts) throw ScenarioError("duration must cover at least one cycle");
  const double ratio = mpc.Ts / plantDt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6) throw ScenarioError("Ts must be an integer multiple of plantDt");
  if (!(corridor.eDefaultMin < corridor.eDefaultMax)) throw ScenarioError("corridor defaults inverted");
  if (!(corridor.margin >= 0.0) || !(corridor.legalMargin >= 0.0)) throw ScenarioError("negative corridor margin");
  if (!(emergencyMin <= corridor.eDefaultMin) || !(emergencyMax >= corridor.eDefaultMax)) {
    throw ScenarioError("emergency limits must contain the default corridor");
  }
  if (!(guidance.wStart >= 0.0) || !(guidance.wEnd >= 0.0) || !(guidance.inflationMargin >= 0.0) ||
      !(guidance.terminalHeadingBlend >= 0.0)) {
    throw ScenarioError("guidance weights and margins must be >= 0");
  }
  if (speedProfile.empty()) throw ScenarioError("speed profile is empty");
  for (std::size_t i = 0; i < speedProfile.size(); ++i) {
    if (!(speedProfile[i].v >= 0.0)) throw ScenarioError("speed profile values must be >= 0");
    if (i > 0 && !(speedProfile[i].t > speedProfile[i - 1].t)) {
      throw ScenarioError("speed profile times must increase");
    }
  }
  if (!(maxDecel > 0.0) || !(speedGain > 0.0) || !(initialSpeed >= 0.0)) {
    throw ScenarioError("maxDecel and speedGain must be > 0, initialSpeed >= 0");
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].t < events[i - 1].t) throw ScenarioError("events must be sorted by time");
  }
  for (const auto& ev : events) {
    if (ev.type == EventType::ForceInfeasible && ev.cycles < 1) throw ScenarioError("forceInfeasible needs cycles >= 1");
    if (ev.type == EventType::Degradation) {
      const auto& d = ev.degradation;
      if (d.angleScale < 0.0 || d.angleScale > 1.0 || d.rateScale < 0.0 || d.rateScale > 1.0) {
        throw ScenarioError("degradation scales must lie in [0, 1]");
      }
    }
  }
  if (random.count < 0) throw ScenarioError("random obstacle count must be >= 0");
  if (random.count > 0) {
    if (!(random.minRadius > 0.0) || !(random.maxRadius >= random.minRadius)) {
      throw ScenarioError("random obstacle radii invalid");
    }
    if (!(random.region.min.x() < random.region.max.x()) || !(random.region.min.y() < random.region.max.y())) {
      throw ScenarioError("random obstacle region is empty");
    }
  }
  if (!goalRegion.empty() && goalRegion.size() < 3) throw ScenarioError("goalRegion needs at least 3 vertices");
  if (!guidance.referencePath.empty() && guidance.referencePath.size() < 2) {
    throw ScenarioError("referencePath needs at least 2 points");
  }
}

double Scenario::speedAt(double t) const {
  double v = speedProfile.front().v;
  for (const auto& bp : speedProfile) {
    if (t + 1e-12 >= bp.t) v = bp.v;
  }
  return v;
}

Scenario parseScenario(const std::string& text, const std::filesystem::path& baseDir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  allowKeys(j, "scenario",
            {"schemaVersion", "name", "seed", "world", "start", "goal", "vehicle", "mpc", "tactical", "corridor",
             "guidance", "speed", "events", "duration", "plantDt", "description"});
  Scenario s;
  s.baseDir = baseDir;
  if (!j.contains("schemaVersion")) throw ScenarioError("scenario: missing schemaVersion");
  readInt(j, "schemaVersion", s.schemaVersion, "scenario");
  if (s.schemaVersion != kScenarioSchemaVersion) {
    throw ScenarioError("unsupported schemaVersion " + std::to_string(s.schemaVersion));
  }
  s.name = j.value("name", "");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("world")) parseWorld(j.at("world"), s);
  if (!j.contains("start") || !j.contains("goal")) throw ScenarioError("scenario: start and goal are required");
  s.start = pose(j.at("start"), "start");
  s.goal = pose(j.at("goal"), "goal");
  if (j.contains("vehicle")) s.vehicle = parseVehicle(j.at("vehicle"));

  if (j.contains("mpc")) {
    const json& m = j.at("mpc");
    allowKeys(m, "mpc", {"horizon", "Ts", "slackWeight", "maxSolveIterations", "kktTolerance"});
    readInt(m, "horizon", s.mpc.horizon, "mpc");
    read(m, "Ts", s.mpc.Ts, "mpc");
    read(m, "slackWeight", s.mpc.slackWeight, "mpc");
    readInt(m, "maxSolveIterations", s.mpc.maxSolveIterations, "mpc");
    read(m, "kktTolerance", s.mpc.kktTolerance, "mpc");
  }
  if (j.contains("tactical")) parseTactical(j.at("tactical"), s.mpc.tactical, "tactical");

  s.corridor.legalMargin = s.vehicle.halfWidth;
  if (j.contains("corridor")) {
    const json& c = j.at("corridor");
    allowKeys(c, "corridor", {"eDefaultMin", "eDefaultMax", "margin", "legalMargin", "emergencyMin", "emergencyMax"});
    read(c, "eDefaultMin", s.corridor.eDefaultMin, "corridor");
    read(c, "eDefaultMax", s.corridor.eDefaultMax, "corridor");
    read(c, "margin", s.corridor.margin, "corridor");
    read(c, "legalMargin", s.corridor.legalMargin, "corridor");
    read(c, "emergencyMin", s.emergencyMin, "corridor");
    read(c, "emergencyMax", s.emergencyMax, "corridor");
  }
  if (j.contains("guidance")) {
    const json& g = j.at("guidance");
    allowKeys(g, "guidance", {"inflationMargin", "wStart", "wEnd", "terminalHeadingBlend", "referencePath"});
    read(g, "inflationMargin", s.guidance.inflationMargin, "guidance");
    read(g, "wStart", s.guidance.wStart, "guidance");
    read(g, "wEnd", s.guidance.wEnd, "guidance");
    read(g, "terminalHeadingBlend", s.guidance.terminalHeadingBlend, "guidance");
    if (g.contains("referencePath")) s.guidance.referencePath = points(g.at("referencePath"), "guidance.referencePath");
  }
  if (j.contains("speed")) {
    const json& v = j.at("speed");
    allowKeys(v, "speed", {"profile", "initial", "maxDecel", "gain"});
    if (v.contains("profile")) {
      const json& prof = v.at("profile");
      if (!prof.is_array()) fail("speed.profile", "expected a list");
      s.speedProfile.clear();
      for (std::size_t i = 0; i < prof.size(); ++i) {
        const std::string w = "speed.profile[" + std::to_string(i) + "]";
        allowKeys(prof[i], w, {"t", "v"});
        SpeedBreakpoint bp;
        read(prof[i], "t", bp.t, w);
        read(prof[i], "v", bp.v, w);
        s.speedProfile.push_back(bp);
      }
    }
    read(v, "initial", s.initialSpeed, "speed");
    read(v, "maxDecel", s.maxDecel, "speed");
    read(v, "gain", s.speedGain, "speed");
  }
  if (j.contains("events")) {
    const json& ev = j.at("events");
    if (!ev.is_array()) fail("events", "expected a list");
    for (std::size_t i = 0; i < ev.size(); ++i) s.events.push_back(parseEvent(ev[i], "events[" + std::to_string(i) + "]"));
  }
  read(j, "duration", s.duration, "scenario");
  read(j, "plantDt", s.plantDt, "scenario");
  s.validate();
  return s;
}

Scenario loadScenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parseScenario(buf.str(), file.parent_path());
  if (s.name.empty()) s.name = file.stem().string();
  return s;
}

std::vector<NamedProfile> parseProfiles(const std::string& text, const TacticalParameters& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed profile file: ") + e.what());
  }
  const json* list = &j;
  if (j.is_object()) {
    allowKeys(j, "profiles file", {"schemaVersion", "profiles"});
    if (!j.contains("profiles")) throw ScenarioError("profiles file: missing profiles");
    list = &j.at("profiles");
  }
  if (!list->is_array()) throw ScenarioError("profiles: expected a list");
  std::vector<NamedProfile> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& p = (*list)[i];
    const std::string w = "profiles[" + std::to_string(i) + "]";
    allowKeys(p, w, {"name", "tactical"});
    NamedProfile np;
    np.name = p.value("name", "profile" + std::to_string(i));
    np.tactical = base;
    if (p.contains("tactical")) parseTactical(p.at("tactical"), np.tactical, w + ".tactical");
    try {
      np.tactical.validate();
    } catch (const std::invalid_argument& e) {
      fail(w, e.what());
    }
    out.push_back(std::move(np));
  }
  return out;
}

std::vector<NamedProfile> loadProfiles(const std::filesystem::path& file, const TacticalParameters& base) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open profile file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseProfiles(buf.str(), base);
}

}  // namespace lpvplan
