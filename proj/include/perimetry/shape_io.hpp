#pragma once

// JSON shape documents.
//
//   {"type": "box", "min": [0, 0], "max": [1, 1]}
//   {"type": "ball", "center": [0, 0], "radius": 1}
//   {"type": "polytope", "vertices": [[0, 0], [1, 0], [0, 1]]}
//   {"type": "polytope", "dim": 2, "halfspaces": [{"normal": [1, 0], "offset": 1}, ...]}
//   {"type": "union", "members": [<shape>, <shape>, ...]}

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perimetry/shapes.hpp"

namespace perimetry {

using json = nlohmann::json;

namespace detail {

inline const json& require_key(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + ": missing required key '" + key + "'");
  return j.at(key);
}

inline double json_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path + ": non-finite number");
  return v;
}

}  // namespace detail

inline Vector vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ValidationError(path + ": expected an array of 1.." + std::to_string(kMaxDim) + " numbers");
  }
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = detail::json_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (double c : v.coords()) a.push_back(c);
  return a;
}

inline Shape shape_from_json(const json& j, const std::string& path = "$") {
  const auto& type_node = detail::require_key(j, "type", path);
  if (!type_node.is_string()) throw ValidationError(path + ".type: expected a string");
  const auto type = type_node.get<std::string>();
  try {
    if (type == "box") {
      return Polytope::box(vector_from_json(detail::require_key(j, "min", path), path + ".min"),
                           vector_from_json(detail::require_key(j, "max", path), path + ".max"));
    }
    if (type == "ball") {
      return Ball(vector_from_json(detail::require_key(j, "center", path), path + ".center"),
                  detail::json_number(detail::require_key(j, "radius", path), path + ".radius"));
    }
    if (type == "polytope") {
      if (j.contains("vertices")) {
        const auto& vs = j.at("vertices");
        if (!vs.is_array()) throw ValidationError(path + ".vertices: expected an array");
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < vs.size(); ++i) pts.push_back(vector_from_json(vs[i], path + ".vertices[" + std::to_string(i) + "]"));
        return Polytope::from_vertices(pts);
      }
      const auto& hs = detail::require_key(j, "halfspaces", path);
      if (!hs.is_array()) throw ValidationError(path + ".halfspaces: expected an array");
      std::vector<Halfspace> list;
      for (std::size_t i = 0; i < hs.size(); ++i) {
        const std::string p = path + ".halfspaces[" + std::to_string(i) + "]";
        list.push_back({vector_from_json(detail::require_key(hs[i], "normal", p), p + ".normal"),
                        detail::json_number(detail::require_key(hs[i], "offset", p), p + ".offset")});
      }
      const auto& dn = detail::require_key(j, "dim", path);
      if (!dn.is_number_integer()) throw ValidationError(path + ".dim: expected an integer");
      return Polytope::from_halfspaces(dn.get<int>(), list);
    }
    if (type == "union") {
      const auto& ms = detail::require_key(j, "members", path);
      if (!ms.is_array() || ms.empty()) throw ValidationError(path + ".members: expected a nonempty array");
      std::vector<Shape> members;
      for (std::size_t i = 0; i < ms.size(); ++i) members.push_back(shape_from_json(ms[i], path + ".members[" + std::to_string(i) + "]"));
      return Shape::disjoint_union(members);
    }
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0 || what.rfind("$", 0) == 0) throw;
    throw ValidationError(path + ": " + what);
  }
  throw ValidationError(path + ".type: unknown shape type '" + type + "'");
}

inline json shape_to_json(const Shape& A) {
  auto piece = [](const ConvexPiece& p) {
    if (const auto* B = std::get_if<Ball>(&p)) {
      return json{{"type", "ball"}, {"center", vector_to_json(B->center())}, {"radius", B->radius()}};
    }
    const auto& P = std::get<Polytope>(p);
    json hs = json::array();
    for (const auto& h : P.facets()) hs.push_back({{"normal", vector_to_json(h.normal)}, {"offset", h.offset}});
    return json{{"type", "polytope"}, {"dim", P.dim()}, {"halfspaces", hs}};
  };
  if (!A.is_union()) return piece(A.pieces().front());
  json members = json::array();
  for (const auto& p : A.pieces()) members.push_back(piece(p));
  return json{{"type", "union"}, {"members", members}};
}

/// Parses JSON text; syntax errors are reported with line/column context.
inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i < e.byte; ++i) line += text[i] == '\n';
    throw ValidationError(source + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
}

inline json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(file + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), file);
}

inline Shape load_shape(const std::string& file) { return shape_from_json(load_json_file(file), file); }

}  // namespace perimetry
