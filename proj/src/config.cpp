#include "corrnum/config.hpp"

#include <fstream>
#include <map>

#include "corrnum/representation_io.hpp"

namespace corrnum {

using nlohmann::json;

const json& config_schema() {
  static const json schema = json::parse(R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "corrnum run configuration",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "rank": {"type": "integer", "minimum": 2, "maximum": 8},
    "n_max": {"type": "integer", "minimum": 1, "maximum": 40},
    "include_powers": {"type": "boolean"},
    "representations": {"type": "array", "items": {"type": "object"}},
    "columns": {
      "type": "array",
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["representation"],
        "properties": {
          "representation": {"type": "string"},
          "functional": {"type": "string"}
        }
      }
    },
    "pair": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
    "b_grid": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "points": {"type": "integer", "minimum": 5},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 5}
      }
    },
    "epsilon": {"type": "number", "exclusiveMinimum": 0},
    "x_grid": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "points": {"type": "integer", "minimum": 5},
        "lo": {"type": "number", "exclusiveMinimum": 0},
        "hi": {"type": "number", "exclusiveMinimum": 0},
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 5},
        "equal_windows": {"type": "boolean"}
      }
    },
    "raw_epsilon": {"type": "number", "exclusiveMinimum": 0},
    "window": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "lo": {"type": "number", "exclusiveMinimum": 0},
        "hi": {"type": "number", "exclusiveMinimum": 0},
        "min_items": {"type": "integer", "minimum": 2}
      }
    },
    "out": {"type": "string"},
    "threads": {"type": "integer", "minimum": 1, "maximum": 256},
    "seed": {"type": "integer", "minimum": 0},
    "force": {"type": "boolean"},
    "allow_proportional": {"type": "boolean"},
    "pilot_length": {"type": "integer", "minimum": 2, "maximum": 12},
    "spot_checks": {"type": "integer", "minimum": 0},
    "demo": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "K": {"type": "number", "exclusiveMinimum": 0},
        "angle": {"type": "number", "exclusiveMinimum": 0}
      }
    }
  }
})");
  return schema;
}

namespace {

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()));
  if (type == "number") return v.is_number();
  return false;
}

// Interprets the subset of JSON Schema used by config_schema().
void validate(const json& v, const json& schema, const std::string& path) {
  auto fail = [&](const std::string& what) { throw Error(Errc::ConfigError, (path.empty() ? "config" : path) + ": " + what); };
  if (schema.contains("type") && !type_matches(v, schema["type"].get<std::string>())) {
    fail("expected " + schema["type"].get<std::string>());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) fail("below minimum " + schema["minimum"].dump());
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) fail("above maximum " + schema["maximum"].dump());
    if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>())) {
      fail("must exceed " + schema["exclusiveMinimum"].dump());
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) fail("too few items");
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) fail("too many items");
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], schema["items"], path + "[" + std::to_string(i) + "]");
    }
  }
  if (v.is_object()) {
    const json props = schema.value("properties", json::object());
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>())) fail("missing key '" + key.get<std::string>() + "'");
      }
    }
    for (const auto& [key, value] : v.items()) {
      const std::string sub = path.empty() ? key : path + "." + key;
      if (props.contains(key)) {
        validate(value, props[key], sub);
      } else if (schema.value("additionalProperties", true) == false) {
        throw Error(Errc::ConfigError, "unknown key '" + sub + "'");
      }
    }
  }
}

std::vector<double> numbers(const json& arr) {
  std::vector<double> out;
  for (const auto& x : arr) out.push_back(x.get<double>());
  return out;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  validate(doc, config_schema(), "");
  RunConfig c;
  c.rank = doc.value("rank", c.rank);
  c.n_max = doc.value("n_max", c.n_max);
  c.include_powers = doc.value("include_powers", c.include_powers);
  if (doc.contains("representations")) {
    for (const auto& r : doc["representations"]) c.representations.push_back(r);
  }
  if (doc.contains("columns")) {
    for (const auto& col : doc["columns"]) {
      c.columns.push_back({col["representation"].get<std::string>(), col.value("functional", std::string())});
    }
  }
  if (doc.contains("pair")) c.pair = {doc["pair"][0].get<std::string>(), doc["pair"][1].get<std::string>()};
  if (doc.contains("b_grid")) {
    const auto& g = doc["b_grid"];
    c.b_points = g.value("points", c.b_points);
    c.b_lo = g.value("lo", c.b_lo);
    c.b_hi = g.value("hi", c.b_hi);
    if (g.contains("values")) c.b_values = numbers(g["values"]);
    if (!(c.b_lo < c.b_hi)) throw Error(Errc::ConfigError, "b_grid: lo must be below hi");
  }
  c.epsilon = doc.value("epsilon", c.epsilon);
  if (doc.contains("x_grid")) {
    const auto& g = doc["x_grid"];
    c.x_points = g.value("points", c.x_points);
    c.x_lo = g.value("lo", c.x_lo);
    c.x_hi = g.value("hi", c.x_hi);
    c.equal_windows = g.value("equal_windows", c.equal_windows);
    if (g.contains("values")) c.x_values = numbers(g["values"]);
    if (!(c.x_lo < c.x_hi)) throw Error(Errc::ConfigError, "x_grid: lo must be below hi");
  }
  c.raw_epsilon = doc.value("raw_epsilon", c.raw_epsilon);
  if (doc.contains("window")) {
    const auto& w = doc["window"];
    c.window_lo = w.value("lo", c.window_lo);
    c.window_hi = w.value("hi", c.window_hi);
    c.window_min_items = w.value("min_items", c.window_min_items);
    if (!(c.window_lo < c.window_hi) || c.window_hi > 1) {
      throw Error(Errc::ConfigError, "window: need 0 < lo < hi <= 1");
    }
  }
  if (doc.contains("out")) c.out = doc["out"].get<std::string>();
  c.threads = doc.value("threads", c.threads);
  c.seed = doc.value("seed", c.seed);
  c.force = doc.value("force", c.force);
  c.allow_proportional = doc.value("allow_proportional", c.allow_proportional);
  c.pilot_length = doc.value("pilot_length", c.pilot_length);
  c.spot_checks = doc.value("spot_checks", c.spot_checks);
  if (doc.contains("demo")) {
    const auto& d = doc["demo"];
    if (d.contains("epsilons")) c.demo_epsilons = numbers(d["epsilons"]);
    c.demo_K = d.value("K", c.demo_K);
    c.demo_angle = d.value("angle", c.demo_angle);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json RunConfig::canonical() const {
  json cols = json::array();
  for (const auto& c : columns) cols.push_back({{"representation", c.representation}, {"functional", c.functional}});
  return {{"version", kVersion},
          {"rank", rank},
          {"n_max", n_max},
          {"include_powers", include_powers},
          {"representations", representations},
          {"columns", cols},
          {"pair", {pair.first, pair.second}},
          {"b_grid", {{"points", b_points}, {"lo", b_lo}, {"hi", b_hi}, {"values", b_values}}},
          {"epsilon", epsilon},
          {"x_grid",
           {{"points", x_points}, {"lo", x_lo}, {"hi", x_hi}, {"values", x_values}, {"equal_windows", equal_windows}}},
          {"raw_epsilon", raw_epsilon},
          {"window", {{"lo", window_lo}, {"hi", window_hi}, {"min_items", window_min_items}}},
          {"seed", seed},
          {"force", force},
          {"allow_proportional", allow_proportional},
          {"pilot_length", pilot_length},
          {"spot_checks", spot_checks},
          {"demo", {{"epsilons", demo_epsilons}, {"K", demo_K}, {"angle", demo_angle}}}};
}

std::vector<Representation> build_representations(const RunConfig& config) {
  std::map<std::string, Representation> known;
  std::vector<Representation> reps;
  for (const auto& doc : config.representations) {
    Representation rep = representation_from_json(doc, known);
    if (known.contains(rep.label())) throw Error(Errc::ConfigError, "duplicate representation label '" + rep.label() + "'");
    if (rep.rank() != config.rank) {
      throw Error(Errc::ConfigError, "representation '" + rep.label() + "' has rank " + std::to_string(rep.rank()) +
                                         " but config rank is " + std::to_string(config.rank));
    }
    known.emplace(rep.label(), rep);
    reps.push_back(std::move(rep));
  }
  if (reps.empty()) throw Error(Errc::ConfigError, "config lists no representations");
  return reps;
}

std::vector<SpectrumRequest> build_requests(const RunConfig& config) {
  const auto reps = build_representations(config);
  auto find = [&](const std::string& label) -> const Representation& {
    for (const auto& r : reps) {
      if (r.label() == label) return r;
    }
    throw Error(Errc::ConfigError, "column refers to unknown representation '" + label + "'");
  };
  auto functional = [](const Representation& rep, const std::string& desc) {
    if (!desc.empty()) {
      try {
        return LengthFunctional::parse(desc, rep.dimension());
      } catch (const Error& e) {
        throw Error(Errc::ConfigError, e.what());
      }
    }
    return rep.dimension() == 2 ? LengthFunctional::alpha(1, 2) : LengthFunctional::hilbert(rep.dimension());
  };
  std::vector<SpectrumRequest> out;
  if (config.columns.empty()) {
    for (const auto& r : reps) out.push_back({r, functional(r, "")});
  } else {
    for (const auto& c : config.columns) {
      const Representation& r = find(c.representation);
      out.push_back({r, functional(r, c.functional)});
    }
  }
  return out;
}

SpectrumOptions spectrum_options(const RunConfig& config) {
  SpectrumOptions o;
  o.rank = config.rank;
  o.n_max = config.n_max;
  o.include_powers = config.include_powers;
  o.threads = config.threads;
  o.force = config.force;
  o.pilot_length = config.pilot_length;
  return o;
}

WindowPolicy window_policy(const RunConfig& config) {
  WindowPolicy w;
  w.lo_fraction = config.window_lo;
  w.hi_fraction = config.window_hi;
  w.min_items = config.window_min_items;
  return w;
}

CorrelationOptions correlation_options(const RunConfig& config) {
  CorrelationOptions o;
  o.curve.grid_points = config.b_points;
  o.curve.b_lo = config.b_lo;
  o.curve.b_hi = config.b_hi;
  o.curve.b_grid = config.b_values;
  o.curve.window = window_policy(config);
  o.curve.allow_proportional = config.allow_proportional;
  o.curve.threads = config.threads;
  o.count.epsilon = config.epsilon;
  o.count.grid_points = config.x_points;
  o.count.lo_fraction = config.x_lo;
  o.count.hi_fraction = config.x_hi;
  o.count.x_grid = config.x_values;
  o.count.mode = config.equal_windows ? WindowMode::EqualWidth : WindowMode::Renormalized;
  return o;
}

}  // namespace corrnum
