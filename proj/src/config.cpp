// YAML experiment files and the shipped presets.
//
//   experiments:
//     kepler_fig3:
//       problem: kepler
//       methods: [feedback_euler, adaptive_feedback, stormer_verlet]
//       gains: [unity, inverse_hl]
//       h_range: [1.0e-3, 1.0e-1]
//       points_per_decade: 3

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fbi/errors.hpp"
#include "fbi/harness.hpp"

namespace fbi {
namespace {

const std::set<std::string> kKeys{
    "problem", "methods", "gains",  "alpha",        "lipschitz", "c",
    "h_min",   "t_update", "h",     "h_range",      "full_h_range", "points_per_decade",
    "t_end",   "periods",  "full_scale", "stride",  "out",       "seed",
    "jobs"};

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& key) {
  if (node.IsScalar()) return {scalar<std::string>(node, key)};
  if (!node.IsSequence()) throw ConfigError("'" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar<std::string>(item, key));
  return out;
}

std::pair<double, double> range(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() != 2) {
    throw ConfigError("'" + key + "' must be a two-element list [lo, hi]");
  }
  return {scalar<double>(node[0], key), scalar<double>(node[1], key)};
}

ExperimentConfig parse_table(const std::string& name, const YAML::Node& table) {
  if (!table.IsMap()) throw ConfigError("experiment '" + name + "' must be a table");
  ExperimentConfig c;
  c.name = name;
  c.h_values.clear();
  for (const auto& kv : table) {
    const auto key = kv.first.as<std::string>();
    if (!kKeys.contains(key)) throw ConfigError("unknown key '" + key + "' in '" + name + "'");
  }
  if (table["problem"]) c.problem = scalar<std::string>(table["problem"], "problem");
  if (table["methods"]) c.methods = string_list(table["methods"], "methods");
  if (table["gains"]) c.gains = string_list(table["gains"], "gains");
  if (table["alpha"]) c.alpha = scalar<double>(table["alpha"], "alpha");
  if (table["lipschitz"]) c.lipschitz = scalar<double>(table["lipschitz"], "lipschitz");
  if (table["c"]) c.c = scalar<double>(table["c"], "c");
  if (table["h_min"]) c.h_min = scalar<double>(table["h_min"], "h_min");
  if (table["t_update"]) c.t_update = scalar<double>(table["t_update"], "t_update");
  if (const auto h = table["h"]) {
    if (h.IsSequence()) {
      for (const auto& item : h) c.h_values.push_back(scalar<double>(item, "h"));
    } else {
      c.h_values.push_back(scalar<double>(h, "h"));
    }
  }
  if (table["h_range"]) c.h_range = range(table["h_range"], "h_range");
  if (table["full_h_range"]) c.full_h_range = range(table["full_h_range"], "full_h_range");
  if (table["points_per_decade"]) {
    c.points_per_decade = scalar<int>(table["points_per_decade"], "points_per_decade");
  }
  if (table["t_end"]) c.t_end = scalar<double>(table["t_end"], "t_end");
  if (table["periods"]) c.periods = scalar<double>(table["periods"], "periods");
  if (table["full_scale"]) c.full_scale = scalar<bool>(table["full_scale"], "full_scale");
  if (table["stride"]) c.stride = scalar<std::size_t>(table["stride"], "stride");
  if (table["out"]) c.out = scalar<std::string>(table["out"], "out");
  if (table["seed"]) c.seed = scalar<std::uint64_t>(table["seed"], "seed");
  if (table["jobs"]) c.jobs = scalar<int>(table["jobs"], "jobs");
  return c;
}

ExperimentConfig make_preset(std::string name, std::string problem,
                             std::vector<std::string> methods, double full_lo) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.problem = std::move(problem);
  c.methods = std::move(methods);
  c.gains = {"unity", "inverse_hl"};
  c.h_range = std::pair{1e-3, 1e-1};
  c.full_h_range = std::pair{full_lo, 1e-1};
  c.points_per_decade = 3;
  return c;
}

}  // namespace

std::vector<ExperimentConfig> parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  const auto experiments = root["experiments"];
  if (!experiments || !experiments.IsMap() || experiments.size() == 0) {
    throw ConfigError("config needs a non-empty 'experiments' table");
  }
  std::vector<ExperimentConfig> out;
  for (const auto& kv : experiments) {
    out.push_back(parse_table(kv.first.as<std::string>(), kv.second));
  }
  return out;
}

std::vector<ExperimentConfig> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

const std::vector<ExperimentConfig>& presets() {
  static const std::vector<ExperimentConfig> all{
      make_preset("rigid_body_fig1", "rigid_body",
                  {"feedback_euler", "adaptive_feedback", "strang_splitting"}, 1e-7),
      make_preset("kepler_fig3", "kepler",
                  {"feedback_euler", "adaptive_feedback", "stormer_verlet"}, 1e-6),
      make_preset("perturbed_fig5", "perturbed_kepler",
                  {"feedback_euler", "adaptive_feedback", "stormer_verlet"}, 1e-9),
  };
  return all;
}

ExperimentConfig preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::string presets_yaml() {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "experiments" << YAML::Value << YAML::BeginMap;
  for (const auto& p : presets()) {
    const Problem problem = make_problem(p.problem);
    out << YAML::Key << p.name << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "problem" << YAML::Value << p.problem;
    out << YAML::Key << "methods" << YAML::Value << YAML::Flow << p.methods;
    out << YAML::Key << "gains" << YAML::Value << YAML::Flow << p.gains;
    out << YAML::Key << "lipschitz" << YAML::Value << problem.lipschitz;
    out << YAML::Key << "c" << YAML::Value << p.c;
    out << YAML::Key << "h_min" << YAML::Value << p.h_min;
    out << YAML::Key << "t_update" << YAML::Value << problem.t_update;
    out << YAML::Key << "h_range" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << p.h_range->first << p.h_range->second << YAML::EndSeq;
    out << YAML::Key << "full_h_range" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << p.full_h_range->first << p.full_h_range->second << YAML::EndSeq;
    out << YAML::Key << "points_per_decade" << YAML::Value << p.points_per_decade;
    out << YAML::EndMap;
  }
  out << YAML::EndMap << YAML::EndMap;
  return out.c_str();
}

}  // namespace fbi
