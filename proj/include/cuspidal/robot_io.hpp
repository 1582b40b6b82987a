#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cuspidal/error.hpp"
#include "cuspidal/model.hpp"
#include "cuspidal/path.hpp"

namespace cuspidal {

using Json = nlohmann::json;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InputFile, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline double json_number(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::InputFile, std::string("field ") + key + " must be a number");
  return v.get<double>();
}

}  // namespace detail

/// Robot from a flat JSON object. Absent r3 is 0; absent twists take the
/// calibrated orthogonal values. With `degrees`, angles are converted.
inline RobotParams robot_from_json(const Json& j, bool degrees = false) {
  if (!j.is_object()) throw Error(ErrorKind::InputFile, "robot file must hold a JSON object");
  const double k = degrees ? kPi / 180.0 : 1.0;
  RobotParams p;
  try {
    for (const char* key : {"d2", "d3", "d4", "r2"})
      if (!j.contains(key)) throw Error(ErrorKind::InputFile, std::string("missing field ") + key);
    p.d2 = detail::json_number(j, "d2");
    p.d3 = detail::json_number(j, "d3");
    p.d4 = detail::json_number(j, "d4");
    p.r2 = detail::json_number(j, "r2");
    if (j.contains("r3")) p.r3 = detail::json_number(j, "r3");
    if (j.contains("alpha2")) p.alpha2 = k * detail::json_number(j, "alpha2");
    if (j.contains("alpha3")) p.alpha3 = k * detail::json_number(j, "alpha3");
    if (j.contains("joint_limits") && !j.at("joint_limits").is_null()) {
      const Json& lim = j.at("joint_limits");
      if (!lim.is_array() || lim.size() != 3)
        throw Error(ErrorKind::InputFile, "joint_limits must be three [lo, hi] pairs");
      std::array<JointRange, 3> r;
      for (int i = 0; i < 3; ++i) {
        const Json& e = lim.at(i);
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw Error(ErrorKind::InputFile, "joint_limits must be three [lo, hi] pairs");
        r[i] = {k * e[0].get<double>(), k * e[1].get<double>()};
      }
      p.joint_limits = r;
    }
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InputFile, e.what());
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InputFile, e.what());
  }
  return p;
}

inline Json robot_to_json(const RobotParams& p) {
  Json j = {{"d2", p.d2}, {"d3", p.d3}, {"d4", p.d4}, {"r2", p.r2},
            {"r3", p.r3}, {"alpha2", p.alpha2}, {"alpha3", p.alpha3}};
  if (p.joint_limits) {
    Json lim = Json::array();
    for (const JointRange& r : *p.joint_limits) lim.push_back({r.lo, r.hi});
    j["joint_limits"] = lim;
  }
  return j;
}

inline RobotParams load_robot(const std::string& path, bool degrees = false) {
  const std::string text = detail::read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InputFile, path + ": " + e.what());
  }
  return robot_from_json(j, degrees);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error(ErrorKind::InputFile, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InputFile, "bad number '" + s + "'");
  }
}

}  // namespace detail

/// Path from JSON {"frame": "rho-z" | "xyz", "waypoints": [[...], ...]} or
/// from CSV whose header row is "rho,z" or "x,y,z".
inline WorkspacePath parse_path(const std::string& text, bool json) {
  WorkspacePath w;
  try {
    if (json) {
      const Json j = Json::parse(text);
      const std::string frame = j.at("frame").get<std::string>();
      if (frame == "rho-z") w.frame = PathFrame::RhoZ;
      else if (frame == "xyz") w.frame = PathFrame::Xyz;
      else throw Error(ErrorKind::InputFile, "frame must be rho-z or xyz");
      const std::size_t dim = w.frame == PathFrame::RhoZ ? 2 : 3;
      for (const Json& e : j.at("waypoints")) {
        if (!e.is_array() || e.size() != dim) throw Error(ErrorKind::InputFile, "waypoint has the wrong arity");
        for (const Json& v : e)
          if (!v.is_number()) throw Error(ErrorKind::InputFile, "waypoint coordinates must be numbers");
        if (dim == 2) w.waypoints.push_back({e[0].get<double>(), 0.0, e[1].get<double>()});
        else w.waypoints.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
      }
    } else {
      std::stringstream ss(text);
      std::string line;
      std::vector<std::string> header;
      while (std::getline(ss, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        const auto cells = detail::split_csv(line);
        if (header.empty()) {
          header = cells;
          if (header == std::vector<std::string>{"rho", "z"}) w.frame = PathFrame::RhoZ;
          else if (header == std::vector<std::string>{"x", "y", "z"}) w.frame = PathFrame::Xyz;
          else throw Error(ErrorKind::InputFile, "CSV header must be rho,z or x,y,z");
          continue;
        }
        if (cells.size() != header.size()) throw Error(ErrorKind::InputFile, "CSV row has the wrong arity");
        if (w.frame == PathFrame::RhoZ)
          w.waypoints.push_back({detail::parse_double(cells[0]), 0.0, detail::parse_double(cells[1])});
        else
          w.waypoints.push_back({detail::parse_double(cells[0]), detail::parse_double(cells[1]),
                                 detail::parse_double(cells[2])});
      }
    }
    w.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InputFile, e.what());
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InputFile, e.what());
  }
  return w;
}

inline WorkspacePath load_path(const std::string& path) {
  const std::string text = detail::read_file(path);
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  return parse_path(text, json);
}

}  // namespace cuspidal
