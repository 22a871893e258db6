#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace lrp::test {

inline constexpr std::string_view kRobotVariables =
    "(var f_vel := [0.25])\n"
    "(var t_vel := [0.5])\n"
    "(var min_distance := [0.5])\n"
    "(var robulab := [RobulabBridge uniqueInstance])\n";

inline constexpr std::string_view kStopMachine =
    "(machine Tito\n"
    "    ( state forward\n"
    "        ( onentry [robulab forward: f_vel] ))\n"
    "    ( state stop\n"
    "        ( onentry [robulab stop] ))\n"
    "    (on obstacle forward -> stop t-stop)\n"
    "    (on noObstacle stop -> forward t-forward)\n"
    "    (event obstacle \n"
    "        [robulab isThereAnObstacle: min_distance])\n"
    "    (event noObstacle \n"
    "        [(robulab isThereAnObstacle: min_distance) not ])       \n"
    ")\n"
    "(spawn Tito forward)\n";

inline constexpr std::string_view kAvoidStates =
    "    ( state turnLeft\n"
    "      ( onentry [robulab turn: t_vel] ))\n"
    "    ( state turnRight\n"
    "      ( onentry [robulab turn: t_vel negated] ))         \n"
    "    (on rightObstacle stop -> turnLeft t-lturn)\n"
    "    (on leftObstacle stop -> turnRight t-rturn)\n"
    "    (on noObstacle turnLeft -> stop t-tlstop)\n"
    "    (on noObstacle turnRight -> stop t-trstop)   \n"
    "    (event rightObstacle [robulab isThereARightObstacle: min_distance])\n"
    "    (event leftObstacle [robulab isThereALeftObstacle: min_distance]) \n";

/// Robot variables plus the stop machine, with `machine_extra` inserted before the machine's
/// closing parenthesis.
inline std::string program_with(std::string_view machine_extra = {}) {
  std::string body(kStopMachine);
  const auto close = body.rfind(")\n(spawn");
  body.insert(close, machine_extra);
  return std::string(kRobotVariables) + body;
}

inline std::string stop_program() { return program_with(); }
inline std::string avoid_program() { return program_with(kAvoidStates); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string source_path(std::string_view rel) {
  return std::string(LRP_SOURCE_DIR) + "/" + std::string(rel);
}

}  // namespace lrp::test
