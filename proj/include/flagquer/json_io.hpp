#pragma once

#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "flagquer/body.hpp"
#include "flagquer/estimate.hpp"
#include "flagquer/functional.hpp"

namespace flagquer {

using json = nlohmann::ordered_json;

namespace detail {

inline Eigen::MatrixXd matrix_from_flat(const json& j, int n, const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != n * n)
    throw std::invalid_argument(field + " must be a flat row-major array of n*n numbers");
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      m(r, c) = j.at(static_cast<std::size_t>(r * n + c)).get<double>();
  return m;
}

inline json matrix_to_flat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw std::invalid_argument(field + " must be an array");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j.at(i).get<double>();
  return v;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline int require_dim(const json& j) {
  if (!j.contains("n")) throw std::invalid_argument("body is missing \"n\"");
  return j.at("n").get<int>();
}

}  // namespace detail

/// Parse a Body from its JSON description; the first violated invariant is
/// reported through the exception message.
inline Body parse_body(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("body JSON must be an object with a \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "ball") {
    const int n = detail::require_dim(j);
    if (!j.contains("radius")) throw std::invalid_argument("ball is missing \"radius\"");
    Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
    if (j.contains("center")) center = detail::vector_from_json(j.at("center"), "center");
    return Body::ball(n, j.at("radius").get<double>(), std::move(center));
  }
  if (type == "ellipsoid") {
    const int n = detail::require_dim(j);
    if (!j.contains("matrix")) throw std::invalid_argument("ellipsoid is missing \"matrix\"");
    Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
    if (j.contains("center")) center = detail::vector_from_json(j.at("center"), "center");
    return Body::ellipsoid(detail::matrix_from_flat(j.at("matrix"), n, "matrix"),
                           std::move(center));
  }
  if (type == "cube") {
    const int n = detail::require_dim(j);
    if (!j.contains("half_width")) throw std::invalid_argument("cube is missing \"half_width\"");
    return Body::cube(n, j.at("half_width").get<double>());
  }
  if (type == "polytope_v") {
    const int n = detail::require_dim(j);
    if (!j.contains("vertices") || !j.at("vertices").is_array() || j.at("vertices").empty())
      throw std::invalid_argument("polytope_v is missing \"vertices\"");
    const auto& rows = j.at("vertices");
    Eigen::MatrixXd verts(n, static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Eigen::VectorXd v = detail::vector_from_json(rows.at(i), "vertices");
      if (v.size() != n) throw std::invalid_argument("vertex dimension mismatch");
      verts.col(static_cast<int>(i)) = v;
    }
    return Body::polytope_v(std::move(verts));
  }
  if (type == "polytope_h") {
    const int n = detail::require_dim(j);
    if (!j.contains("A") || !j.at("A").is_array() || j.at("A").empty())
      throw std::invalid_argument("polytope_h is missing \"A\"");
    if (!j.contains("b")) throw std::invalid_argument("polytope_h is missing \"b\"");
    const auto& rows = j.at("A");
    Eigen::MatrixXd a(static_cast<int>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Eigen::VectorXd r = detail::vector_from_json(rows.at(i), "A");
      if (r.size() != n) throw std::invalid_argument("facet row dimension mismatch");
      a.row(static_cast<int>(i)) = r.transpose();
    }
    return Body::polytope_h(std::move(a), detail::vector_from_json(j.at("b"), "b"));
  }
  throw std::invalid_argument("unknown body type \"" + type + "\"");
}

inline json emit_body(const Body& body) {
  json j;
  switch (body.kind()) {
    case Body::Kind::ball:
      j["type"] = "ball";
      j["n"] = body.dim();
      j["radius"] = body.radius();
      if (body.center().norm() > 0.0) j["center"] = detail::vector_to_json(body.center());
      break;
    case Body::Kind::ellipsoid:
      j["type"] = "ellipsoid";
      j["n"] = body.dim();
      j["matrix"] = detail::matrix_to_flat(body.quadratic_form());
      if (body.center().norm() > 0.0) j["center"] = detail::vector_to_json(body.center());
      break;
    case Body::Kind::cube:
      j["type"] = "cube";
      j["n"] = body.dim();
      j["half_width"] = body.half_width();
      break;
    case Body::Kind::polytope_v: {
      j["type"] = "polytope_v";
      j["n"] = body.dim();
      json rows = json::array();
      for (int c = 0; c < body.vertices().cols(); ++c)
        rows.push_back(detail::vector_to_json(body.vertices().col(c)));
      j["vertices"] = std::move(rows);
      break;
    }
    case Body::Kind::polytope_h: {
      j["type"] = "polytope_h";
      j["n"] = body.dim();
      json rows = json::array();
      for (int r = 0; r < body.facet_matrix().rows(); ++r)
        rows.push_back(detail::vector_to_json(body.facet_matrix().row(r).transpose()));
      j["A"] = std::move(rows);
      j["b"] = detail::vector_to_json(body.facet_offsets());
      break;
    }
  }
  return j;
}

inline FlagFunction parse_function(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("function JSON must be an object with a \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    if (!j.contains("matrix")) throw std::invalid_argument("gaussian is missing \"matrix\"");
    const auto& flat = j.at("matrix");
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    return GaussianFn(detail::matrix_from_flat(flat, n, "matrix"));
  }
  if (type == "level_stack") {
    if (!j.contains("levels") || !j.at("levels").is_array() || j.at("levels").empty())
      throw std::invalid_argument("level_stack is missing \"levels\"");
    std::vector<LevelStackFn::Level> levels;
    for (const auto& entry : j.at("levels")) {
      if (!entry.contains("t") || !entry.contains("body"))
        throw std::invalid_argument("each level needs \"t\" and \"body\"");
      levels.push_back({entry.at("t").get<double>(), parse_body(entry.at("body"))});
    }
    return LevelStackFn(std::move(levels));
  }
  throw std::invalid_argument("unknown function type \"" + type + "\"");
}

inline json emit_function(const FlagFunction& f) {
  if (const auto* g = std::get_if<GaussianFn>(&f)) {
    json j;
    j["type"] = "gaussian";
    j["matrix"] = detail::matrix_to_flat(g->matrix());
    return j;
  }
  const auto& stack = std::get<LevelStackFn>(f);
  json j;
  j["type"] = "level_stack";
  json levels = json::array();
  for (const auto& level : stack.levels()) {
    json entry;
    entry["t"] = level.height;
    entry["body"] = emit_body(level.body);
    levels.push_back(std::move(entry));
  }
  j["levels"] = std::move(levels);
  return j;
}

// ---------------------------------------------------------------------------
// Result serialization
// ---------------------------------------------------------------------------

/// One computed quantity in the result schema shared by the CLI and the JSON
/// and CSV writers.
struct Result {
  std::string quantity;
  json body;                       // body or function JSON (null if none)
  std::vector<int> indices;        // empty if not index-based
  std::vector<int> permutation;    // empty if not permutation-based
  Estimate estimate;
};

inline json result_to_json(const Result& r) {
  json j;
  j["quantity"] = r.quantity;
  j["body"] = r.body.is_null() ? json() : r.body;
  if (!r.indices.empty()) j["indices"] = r.indices;
  if (!r.permutation.empty()) j["permutation"] = r.permutation;
  j["mean"] = r.estimate.mean;
  j["std_error"] = r.estimate.std_error;
  j["samples"] = r.estimate.samples;
  j["seed"] = r.estimate.seed;
  j["wall_time_ms"] = r.estimate.wall_time_ms;
  return j;
}

inline std::string result_csv_header() {
  return "quantity,body,indices,permutation,mean,std_error,samples,seed,wall_time_ms";
}

inline std::string result_to_csv(const Result& r) {
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += std::to_string(v[i]);
    }
    return s;
  };
  std::ostringstream out;
  out.precision(17);
  std::string body = r.body.is_null() ? "" : r.body.dump();
  for (auto& c : body)
    if (c == '"') c = '\'';
  out << r.quantity << ",\"" << body << "\"," << join(r.indices) << ',' << join(r.permutation)
      << ',' << r.estimate.mean << ',' << r.estimate.std_error << ',' << r.estimate.samples
      << ',' << r.estimate.seed << ',' << r.estimate.wall_time_ms;
  return out.str();
}

}  // namespace flagquer
