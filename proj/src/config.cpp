#include "pdmpis/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pdmpis/error.hpp"
#include "pdmpis/systems.hpp"

namespace pdmpis {

using nlohmann::json;

std::size_t ModelDefaults::packet_size_for(Family f) const {
  auto it = packet_size.find(f);
  return it == packet_size.end() ? 1 : it->second;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::config, what); }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

SpDiagram parse_structure(const json& j, const std::map<std::string, std::size_t>& ids) {
  if (j.is_string()) {
    auto it = ids.find(j.get<std::string>());
    if (it == ids.end()) fail("structure names unknown component '" + j.get<std::string>() + "'");
    return SpDiagram::component(it->second);
  }
  if (!j.is_object() || j.size() != 1) {
    fail("structure node must be a component name or {\"series\"|\"parallel\": [...]}");
  }
  const std::string key = j.begin().key();
  const json& value = j.begin().value();
  if (!value.is_array() || value.empty()) fail("structure group '" + key + "' needs a non-empty list");
  std::vector<SpDiagram> children;
  for (const auto& c : value) children.push_back(parse_structure(c, ids));
  if (key == "series") return SpDiagram::series(std::move(children));
  if (key == "parallel") return SpDiagram::parallel(std::move(children));
  fail("unknown structure group '" + key + "'");
}

AffineRate affine(const json& comp, const char* key) {
  const json& v = need(comp, key);
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  fail(std::string("rate '") + key + "' must be a number or [intercept, slope]");
}

ModelDefaults parse_defaults(const json& root) {
  ModelDefaults d;
  if (!root.contains("defaults")) return d;
  const json& j = root.at("defaults");
  if (j.contains("packet_size")) {
    for (const auto& [name, v] : j.at("packet_size").items()) {
      if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
        fail("packet sizes must be positive integers");
      }
      d.packet_size[parse_family(name)] = v.get<std::size_t>();
    }
  }
  if (j.contains("init_t")) d.init_t = number(j, "init_t");
  d.init_p = number_or(j, "init_p", d.init_p);
  if (j.contains("theta_hi")) d.theta_hi = number(j, "theta_hi");
  return d;
}

std::map<std::string, std::size_t> component_ids(const json& comps, std::vector<std::string>& names) {
  if (!comps.is_array() || comps.empty()) fail("'components' must be a non-empty list");
  std::map<std::string, std::size_t> ids;
  for (const auto& c : comps) {
    const json& n = need(c, "name");
    if (!n.is_string()) fail("component names must be strings");
    if (!ids.emplace(n.get<std::string>(), names.size()).second) {
      fail("duplicate component name '" + n.get<std::string>() + "'");
    }
    names.push_back(n.get<std::string>());
  }
  if (names.size() > kMaxComponents) fail("at most 64 components are supported");
  return ids;
}

LoadedModel parse_grace(const json& root) {
  LoadedModel out;
  const json& comps = need(root, "components");
  const auto ids = component_ids(comps, out.component_names);
  GracePeriodConfig c;
  c.name = need(root, "name").get<std::string>();
  c.components = out.component_names.size();
  c.t_max = number(root, "t_max");
  const json& grace = need(root, "grace");
  c.global_grace = number(grace, "global");
  c.local_grace = number(grace, "local");
  bool has_initial = false;
  std::vector<std::int8_t> initial;
  for (const auto& comp : comps) {
    c.failure_rates.push_back(number(comp, "failure"));
    c.repair_rates.push_back(number(comp, "repair"));
    if (comp.contains("initial_status")) has_initial = true;
    const double s = number_or(comp, "initial_status", 1.0);
    if (s != 0.0 && s != 1.0) fail("initial_status must be 0 or 1");
    initial.push_back(static_cast<std::int8_t>(s));
  }
  if (has_initial) c.initial_mode = initial;
  c.diagram = parse_structure(need(root, "structure"), ids);
  out.model = std::make_unique<GracePeriodModel>(c);
  out.defaults = parse_defaults(root);
  return out;
}

LoadedModel parse_sfp(const json& root) {
  LoadedModel out;
  const json& comps = need(root, "components");
  const auto ids = component_ids(comps, out.component_names);
  SfpConfig c;
  c.name = need(root, "name").get<std::string>();
  c.components = out.component_names.size();
  const json& k = need(root, "constants");
  SfpConstants& s = c.constants;
  s.residual_power = number(k, "residual_power");
  s.heat_capacity = number(k, "heat_capacity");
  s.density = number(k, "density");
  s.area = number(k, "area");
  s.source_temperature = number(k, "source_temperature");
  s.flow_rate = number(k, "flow_rate");
  s.latent_heat = number(k, "latent_heat");
  s.t_max = number(k, "t_max");
  s.initial_level = number(k, "initial_level");
  s.critical_level = number(k, "critical_level");
  s.initial_temperature = number_or(k, "initial_temperature", s.source_temperature);
  s.boiling_temperature = number_or(k, "boiling_temperature", 100.0);
  const std::string formula = root.value("level_rate_formula", std::string("as_printed"));
  if (formula == "as_printed") {
    c.level_rate_formula = LevelRateFormula::as_printed;
  } else if (formula == "latent_heat") {
    c.level_rate_formula = LevelRateFormula::latent_heat;
  } else {
    fail("level_rate_formula must be 'as_printed' or 'latent_heat'");
  }
  c.rates = RateTable(c.components, {-1, 0, 1});
  for (std::size_t j = 0; j < c.components; ++j) {
    c.rates.at(j, -1) = affine(comps[j], "broken");
    c.rates.at(j, 0) = affine(comps[j], "inactive");
    c.rates.at(j, 1) = affine(comps[j], "active");
  }
  c.diagram = parse_structure(need(root, "structure"), ids);
  out.model = std::make_unique<SfpModel>(c);
  out.defaults = parse_defaults(root);
  return out;
}

}  // namespace

LoadedModel parse_model(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  try {
    const json& version = need(root, "schema_version");
    if (!version.is_number_integer() || version.get<int>() != kModelSchemaVersion) {
      fail("unsupported schema_version (expected " + std::to_string(kModelSchemaVersion) + ")");
    }
    const std::string kind = need(root, "kind").get<std::string>();
    if (kind == "grace_period") return parse_grace(root);
    if (kind == "spent_fuel_pool") return parse_sfp(root);
    fail("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(std::string("bad model description: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    throw Error(ErrorKind::config, e.what());
  }
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace pdmpis
