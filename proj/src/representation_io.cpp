#include "corrnum/representation_io.hpp"

#include <set>

namespace corrnum {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) throw Error(Errc::ConfigError, what + ": unknown key '" + key + "'");
  }
}

double number(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number()) {
    throw Error(Errc::ConfigError, std::string("representation: '") + key + "' must be a number");
  }
  return doc.at(key).get<double>();
}

Representation resolve_base(const json& base, const std::map<std::string, Representation>& known) {
  if (base.is_string()) {
    const auto it = known.find(base.get<std::string>());
    if (it == known.end()) throw Error(Errc::ConfigError, "unknown base representation '" + base.get<std::string>() + "'");
    return it->second;
  }
  return representation_from_json(base, known);
}

}  // namespace

Representation representation_from_json(const json& doc, const std::map<std::string, Representation>& known) {
  if (!doc.is_object()) throw Error(Errc::ConfigError, "representation must be a JSON object");
  const std::string type = doc.value("type", std::string("matrices"));
  std::string label = doc.value("label", std::string());
  const double tol = doc.value("eig_tolerance", 1e-10);
  if (type == "schottky") {
    reject_unknown_keys(doc, {"type", "la", "lb", "angle", "label", "eig_tolerance"}, "schottky");
    Representation rep = schottky_pair(number(doc, "la"), number(doc, "lb"), number(doc, "angle"));
    if (!label.empty()) rep = rep.with_label(label);
    return rep;
  }
  if (type == "sym_power") {
    reject_unknown_keys(doc, {"type", "base", "d", "label"}, "sym_power");
    if (!doc.contains("base")) throw Error(Errc::ConfigError, "sym_power: missing 'base'");
    Representation rep = sym_power_embed(resolve_base(doc.at("base"), known), static_cast<int>(number(doc, "d")));
    if (!label.empty()) rep = rep.with_label(label);
    return rep;
  }
  if (type == "contragredient") {
    reject_unknown_keys(doc, {"type", "base", "label"}, "contragredient");
    if (!doc.contains("base")) throw Error(Errc::ConfigError, "contragredient: missing 'base'");
    Representation rep = contragredient(resolve_base(doc.at("base"), known));
    if (!label.empty()) rep = rep.with_label(label);
    return rep;
  }
  if (type != "matrices") throw Error(Errc::ConfigError, "unknown representation type '" + type + "'");
  reject_unknown_keys(doc, {"type", "label", "dimension", "rank", "generators", "eig_tolerance", "parameters"},
                      "representation");
  const int d = static_cast<int>(number(doc, "dimension"));
  const int r = static_cast<int>(number(doc, "rank"));
  if (!doc.contains("generators") || !doc.at("generators").is_array()) {
    throw Error(Errc::ConfigError, "representation: 'generators' must be an array");
  }
  const json& gens = doc.at("generators");
  if (static_cast<int>(gens.size()) != r) throw Error(Errc::ConfigError, "representation: generator count != rank");
  std::vector<Representation::Matrix> images;
  for (const auto& g : gens) {
    if (!g.is_array() || static_cast<int>(g.size()) != d * d) {
      throw Error(Errc::ConfigError, "representation: each generator needs d*d row-major reals");
    }
    Representation::Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = g.at(i * d + j).get<double>();
    images.push_back(std::move(m));
  }
  if (label.empty()) throw Error(Errc::ConfigError, "representation: 'label' is required");
  std::vector<RepresentationParameter> params;
  if (doc.contains("parameters")) {
    for (const auto& [k, v] : doc.at("parameters").items()) params.push_back({k, v.get<double>()});
  }
  return Representation(label, std::move(images), tol, std::move(params));
}

json representation_to_json(const Representation& rep) {
  json doc;
  doc["label"] = rep.label();
  doc["dimension"] = rep.dimension();
  doc["rank"] = rep.rank();
  doc["eig_tolerance"] = rep.eig_tolerance();
  json gens = json::array();
  for (const auto& g : rep.generators()) {
    json flat = json::array();
    for (int i = 0; i < rep.dimension(); ++i)
      for (int j = 0; j < rep.dimension(); ++j) flat.push_back(g(i, j));
    gens.push_back(std::move(flat));
  }
  doc["generators"] = std::move(gens);
  if (!rep.parameters().empty()) {
    json params = json::object();
    for (const auto& p : rep.parameters()) params[p.name] = p.value;
    doc["parameters"] = std::move(params);
  }
  return doc;
}

}  // namespace corrnum
