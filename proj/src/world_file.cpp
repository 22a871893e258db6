#include "lrp/world_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lrp::sim {

namespace {

using nlohmann::json;

double number_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw WorldError(std::string("missing numeric field \"") + key + "\"");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw WorldError(std::string("field \"") + key + "\" is not finite");
  return v;
}

}  // namespace

Expected<WorldSpec, std::string> parse_world(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) return unexpected(std::string("world file must be a JSON object"));

    std::vector<Segment> segments;
    if (const auto it = doc.find("segments"); it != doc.end()) {
      if (!it->is_array()) return unexpected(std::string("\"segments\" must be an array"));
      for (const auto& s : *it) {
        if (!s.is_object()) return unexpected(std::string("segment entries must be objects"));
        segments.push_back({{number_field(s, "x1"), number_field(s, "y1")}, {number_field(s, "x2"), number_field(s, "y2")}});
      }
    }

    std::optional<Bounds> bounds;
    if (const auto it = doc.find("bounds"); it != doc.end()) {
      bounds = Bounds{number_field(*it, "xmin"), number_field(*it, "ymin"), number_field(*it, "xmax"),
                      number_field(*it, "ymax")};
    }

    RobotState initial;
    const auto pose = doc.find("pose");
    if (pose == doc.end() || !pose->is_object()) return unexpected(std::string("missing \"pose\" object"));
    initial.x = number_field(*pose, "x");
    initial.y = number_field(*pose, "y");
    initial.theta = normalize_angle(number_field(*pose, "theta"));
    if (doc.contains("radius")) {
      initial.radius = number_field(doc, "radius");
      if (!(initial.radius > 0.0)) return unexpected(std::string("\"radius\" must be positive"));
    }
    return WorldSpec{World(std::move(segments), bounds), initial};
  } catch (const json::exception& e) {
    return unexpected(std::string("invalid world JSON: ") + e.what());
  } catch (const WorldError& e) {
    return unexpected(std::string("invalid world: ") + e.what());
  }
}

Expected<WorldSpec, std::string> load_world(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return unexpected("cannot read world file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto spec = parse_world(ss.str());
  if (!spec) return unexpected(path + ": " + spec.error());
  return spec;
}

}  // namespace lrp::sim
