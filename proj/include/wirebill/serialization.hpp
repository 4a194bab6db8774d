#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wirebill/curve.hpp"
#include "wirebill/ellipsoid.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// Violation of the documented configuration schema. The message carries the
/// JSON field path of the offending entry.
class SchemaError : public std::invalid_argument {
 public:
  explicit SchemaError(const std::string& what) : std::invalid_argument(what) {}
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key,
                             const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw SchemaError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

inline double number_or(const nlohmann::json& j, const std::string& key,
                        double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw SchemaError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

inline int int_or(const nlohmann::json& j, const std::string& key, int fallback,
                  const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw SchemaError(path + "." + key + ": expected an integer");
  return j[key].get<int>();
}

inline std::vector<double> number_list(const nlohmann::json& j,
                                       const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw SchemaError(path + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Vec vec_from_json(const nlohmann::json& j, const std::string& path) {
  const auto values = number_list(j, path);
  Vec v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<int>(i)] = values[i];
  return v;
}

}  // namespace detail

/// Parses the documented curve-spec JSON object (field "kind" plus
/// kind-specific keys). Throws SchemaError with the offending field path.
inline CurveSpec curve_spec_from_json(const nlohmann::json& j,
                                      const std::string& path = "curve") {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw SchemaError(path + ".kind: expected a string");
  const std::string kind = j["kind"].get<std::string>();
  CurveSpec spec;
  if (kind == "circle") {
    spec = CurveSpec::circle(detail::require_number(j, "radius", path),
                             detail::int_or(j, "dimension", 2, path));
  } else if (kind == "planar-ellipse") {
    spec = CurveSpec::ellipse(detail::require_number(j, "a", path),
                              detail::require_number(j, "b", path));
  } else if (kind == "fourier-convex") {
    std::vector<double> cos_c, sin_c;
    if (j.contains("cos")) cos_c = detail::number_list(j["cos"], path + ".cos");
    if (j.contains("sin")) sin_c = detail::number_list(j["sin"], path + ".sin");
    spec = CurveSpec::fourier(detail::number_or(j, "base_radius", 1.0, path),
                              std::move(cos_c), std::move(sin_c));
  } else if (kind == "coil") {
    spec = CurveSpec::coil(detail::require_number(j, "epsilon", path),
                           detail::int_or(j, "m", 2, path));
  } else if (kind == "subgroup-orbit") {
    if (!j.contains("matrix") || !j["matrix"].is_array())
      throw SchemaError(path + ".matrix: expected an array of rows");
    const auto& rows = j["matrix"];
    const int n = static_cast<int>(rows.size());
    Mat a(n, n);
    for (int r = 0; r < n; ++r) {
      const auto row = detail::number_list(rows[r], path + ".matrix[" +
                                                        std::to_string(r) + "]");
      if (static_cast<int>(row.size()) != n)
        throw SchemaError(path + ".matrix: rows must form a square matrix");
      for (int c = 0; c < n; ++c) a(r, c) = row[c];
    }
    if (!j.contains("seed"))
      throw SchemaError(path + ".seed: required for subgroup-orbit");
    const Vec seed = detail::vec_from_json(j["seed"], path + ".seed");
    spec = CurveSpec::subgroup_orbit(a, seed,
                                     detail::number_or(j, "period", kTwoPi, path));
  } else if (kind == "flat-point") {
    spec = CurveSpec::flat_point(detail::number_or(j, "scale", 1.0, path));
  } else if (kind == "raw-samples") {
    if (!j.contains("samples") || !j["samples"].is_array())
      throw SchemaError(path + ".samples: expected an array of points");
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < j["samples"].size(); ++i)
      pts.push_back(detail::vec_from_json(
          j["samples"][i], path + ".samples[" + std::to_string(i) + "]"));
    bool closed = true;
    if (j.contains("closed")) {
      if (!j["closed"].is_boolean())
        throw SchemaError(path + ".closed: expected a boolean");
      closed = j["closed"].get<bool>();
    }
    spec = CurveSpec::raw_samples(std::move(pts), closed);
  } else {
    throw SchemaError(path + ".kind: unknown kind '" + kind + "'");
  }

  if (j.contains("perturbation")) {
    const auto& p = j["perturbation"];
    if (!p.is_object())
      throw SchemaError(path + ".perturbation: expected an object");
    auto read_coeffs = [&](const char* key) {
      std::vector<Vec> out;
      if (!p.contains(key)) return out;
      if (!p[key].is_array())
        throw SchemaError(path + ".perturbation." + key + ": expected an array");
      for (std::size_t i = 0; i < p[key].size(); ++i)
        out.push_back(detail::vec_from_json(
            p[key][i],
            path + ".perturbation." + key + "[" + std::to_string(i) + "]"));
      return out;
    };
    spec.perturbation.cos_coeffs = read_coeffs("cos");
    spec.perturbation.sin_coeffs = read_coeffs("sin");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return spec;
}

inline nlohmann::json to_json(const CurveSpec& spec) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case CurveKind::Circle:
      j["radius"] = spec.radius;
      j["dimension"] = spec.dimension;
      break;
    case CurveKind::PlanarEllipse:
      j["a"] = spec.semi_axis_a;
      j["b"] = spec.semi_axis_b;
      break;
    case CurveKind::FourierConvex:
      j["base_radius"] = spec.base_radius;
      j["cos"] = spec.support_cos;
      j["sin"] = spec.support_sin;
      break;
    case CurveKind::Coil:
      j["epsilon"] = spec.coil_epsilon;
      j["m"] = spec.coil_m;
      break;
    case CurveKind::SubgroupOrbit: {
      std::vector<std::vector<double>> rows;
      for (int r = 0; r < spec.subgroup_generator.rows(); ++r) {
        std::vector<double> row;
        for (int c = 0; c < spec.subgroup_generator.cols(); ++c)
          row.push_back(spec.subgroup_generator(r, c));
        rows.push_back(std::move(row));
      }
      j["matrix"] = rows;
      std::vector<double> seed;
      for (int i = 0; i < spec.subgroup_seed.size(); ++i)
        seed.push_back(spec.subgroup_seed[i]);
      j["seed"] = seed;
      j["period"] = spec.raw_period;
      break;
    }
    case CurveKind::FlatPoint:
      j["scale"] = spec.scale;
      break;
    case CurveKind::RawSamples: {
      std::vector<std::vector<double>> pts;
      for (const auto& s : spec.samples) {
        std::vector<double> p;
        for (int i = 0; i < s.size(); ++i) p.push_back(s[i]);
        pts.push_back(std::move(p));
      }
      j["samples"] = pts;
      j["closed"] = spec.closed;
      break;
    }
  }
  if (!spec.perturbation.empty()) {
    auto dump = [](const std::vector<Vec>& coeffs) {
      std::vector<std::vector<double>> out;
      for (const auto& v : coeffs) {
        std::vector<double> row;
        for (int i = 0; i < v.size(); ++i) row.push_back(v[i]);
        out.push_back(std::move(row));
      }
      return out;
    };
    j["perturbation"] = {{"cos", dump(spec.perturbation.cos_coeffs)},
                         {"sin", dump(spec.perturbation.sin_coeffs)}};
  }
  return j;
}

inline ConfocalFamily confocal_from_json(const nlohmann::json& j,
                                         const std::string& path = "axes") {
  const Vec axes = detail::vec_from_json(j, path);
  try {
    return ConfocalFamily(axes);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace wirebill
