#include "sedge/config.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sedge {

using nlohmann::ordered_json;

std::string to_string(GainType g) { return g == GainType::Gini ? "gini" : "entropy"; }
std::string to_string(Discretizer d) { return d == Discretizer::Pca ? "pca" : "kmeans"; }
std::string to_string(TreeSchedule s) { return s == TreeSchedule::Checkerboard ? "checkerboard" : "rows"; }

namespace {

GainType parse_gain(const std::string& s) {
  if (s == "gini") return GainType::Gini;
  if (s == "entropy") return GainType::Entropy;
  throw ConfigError("gain must be \"gini\" or \"entropy\", got \"" + s + "\"");
}

Discretizer parse_discretizer(const std::string& s) {
  if (s == "pca") return Discretizer::Pca;
  if (s == "kmeans") return Discretizer::Kmeans;
  throw ConfigError("discretizer must be \"pca\" or \"kmeans\", got \"" + s + "\"");
}

TreeSchedule parse_schedule(const std::string& s) {
  if (s == "checkerboard") return TreeSchedule::Checkerboard;
  if (s == "rows") return TreeSchedule::Rows;
  throw ConfigError("schedule must be \"checkerboard\" or \"rows\", got \"" + s + "\"");
}

using Setter = std::function<void(RunConfig&, const ordered_json&)>;
using Getter = std::function<ordered_json(const RunConfig&)>;

struct Field {
  Getter get;
  Setter set;
};

template <typename T>
T as(const ordered_json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError("");
      const auto x = v.get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) throw ConfigError("");
      return static_cast<int>(x);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError("");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
      return v.get<bool>();
    } else {
      if (!v.is_string()) throw ConfigError("");
      return v.get<std::string>();
    }
  } catch (const ConfigError&) {
    throw ConfigError("config key \"" + key + "\" has the wrong type");
  }
}

#define SEDGE_FIELD(section, key, type, member)                                              \
  {section "." key,                                                                           \
   Field{[](const RunConfig& c) { return ordered_json(c.member); },                          \
         [](RunConfig& c, const ordered_json& v) { c.member = as<type>(v, section "." key); }}}

#define SEDGE_ENUM(section, key, member, parser)                                              \
  {section "." key, Field{[](const RunConfig& c) { return ordered_json(to_string(c.member)); }, \
                          [](RunConfig& c, const ordered_json& v) {                           \
                            c.member = parser(as<std::string>(v, section "." key));          \
                          }}}

/// Ordered field table; the order is the order of config_to_json.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      SEDGE_FIELD("forest", "n_trees_trained", int, forest.n_trees_trained),
      SEDGE_FIELD("forest", "n_trees_eval", int, forest.n_trees_eval),
      SEDGE_FIELD("forest", "m", int, forest.m),
      SEDGE_FIELD("forest", "k_classes", int, forest.k_classes),
      SEDGE_FIELD("forest", "pca_dims", int, forest.pca_dims),
      SEDGE_FIELD("forest", "max_depth", int, forest.max_depth),
      SEDGE_FIELD("forest", "min_samples", int, forest.min_samples),
      SEDGE_FIELD("forest", "frac_features", double, forest.frac_features),
      SEDGE_FIELD("forest", "n_patches", int, forest.n_patches),
      SEDGE_FIELD("forest", "n_images", int, forest.n_images),
      SEDGE_FIELD("forest", "positive_fraction", double, forest.positive_fraction),
      SEDGE_ENUM("forest", "gain", forest.gain, parse_gain),
      SEDGE_ENUM("forest", "discretizer", forest.discretizer, parse_discretizer),
      SEDGE_FIELD("forest", "n_thresholds", int, forest.n_thresholds),
      SEDGE_FIELD("forest", "stride", int, forest.stride),
      SEDGE_FIELD("forest", "d_in", int, forest.d_in),
      SEDGE_FIELD("forest", "d_out", int, forest.d_out),
      SEDGE_FIELD("forest", "seed", std::uint64_t, forest.seed),
      SEDGE_FIELD("channels", "shrink", int, channels.shrink),
      SEDGE_FIELD("channels", "n_orients", int, channels.n_orients),
      SEDGE_FIELD("channels", "norm_radius", int, channels.norm_radius),
      SEDGE_FIELD("channels", "channel_blur", int, channels.channel_blur),
      SEDGE_FIELD("channels", "ss_blur", int, channels.ss_blur),
      SEDGE_FIELD("channels", "grid_cells", int, channels.grid_cells),
      SEDGE_FIELD("detect", "sharpen_steps", int, detect.sharpen_steps),
      SEDGE_FIELD("detect", "multiscale", bool, detect.multiscale),
      SEDGE_FIELD("detect", "stride", int, detect.stride),
      SEDGE_FIELD("detect", "n_trees_eval", int, detect.n_trees_eval),
      SEDGE_ENUM("detect", "schedule", detect.schedule, parse_schedule),
      SEDGE_FIELD("eval", "n_thresholds", int, eval_thresholds),
      SEDGE_FIELD("eval", "tolerance", double, eval_tolerance),
      SEDGE_FIELD("eval", "nms_border", int, nms_border),
      SEDGE_FIELD("paths", "train_dataset", std::string, paths.train_dataset),
      SEDGE_FIELD("paths", "test_dataset", std::string, paths.test_dataset),
      SEDGE_FIELD("paths", "model", std::string, paths.model),
      SEDGE_FIELD("paths", "output", std::string, paths.output),
  };
  return table;
}

#undef SEDGE_FIELD
#undef SEDGE_ENUM

const Field* find_field(const std::string& dotted) {
  for (const auto& [name, f] : fields())
    if (name == dotted) return &f;
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  try {
    forest.validate();
    channels.validate();
    detect.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (forest.stride % channels.shrink != 0) throw ConfigError("forest.stride must be a multiple of channels.shrink");
  if (forest.d_in % channels.shrink != 0) throw ConfigError("forest.d_in must be a multiple of channels.shrink");
  if (forest.d_in / channels.shrink < channels.grid_cells)
    throw ConfigError("channels.grid_cells exceeds the downsampled patch size");
  if (detect.stride > 0 && (detect.stride % channels.shrink != 0 || forest.d_out % detect.stride != 0))
    throw ConfigError("detect.stride must be a multiple of shrink and divide d_out");
  if (detect.n_trees_eval > forest.n_trees_eval) throw ConfigError("detect.n_trees_eval exceeds the trained T");
  if (eval_thresholds < 1) throw ConfigError("eval.n_thresholds must be >= 1");
  if (!(eval_tolerance > 0.0)) throw ConfigError("eval.tolerance must be > 0");
  if (nms_border < 0) throw ConfigError("eval.nms_border must be >= 0");
}

EvalOptions RunConfig::eval_options() const {
  EvalOptions o;
  o.n_thresholds = eval_thresholds;
  o.tolerance = eval_tolerance;
  o.nms.border = nms_border;
  o.threads = threads;
  return o;
}

RunConfig parse_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "threads") {
      cfg.threads = as<int>(value, key);
    } else if (key == "deterministic") {
      cfg.deterministic = as<bool>(value, key);
    } else if (key == "forest" || key == "channels" || key == "detect" || key == "eval" || key == "paths") {
      if (!value.is_object()) throw ConfigError("config section \"" + key + "\" must be an object");
      for (const auto& [sub, v] : value.items()) {
        const Field* f = find_field(key + "." + sub);
        if (!f) throw ConfigError("unknown config key \"" + key + "." + sub + "\"");
        f->set(cfg, v);
      }
    } else {
      throw ConfigError("unknown config key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
  ordered_json j;
  for (const auto& [name, f] : fields()) {
    const auto dot = name.find('.');
    j[name.substr(0, dot)][name.substr(dot + 1)] = f.get(cfg);
  }
  j["threads"] = cfg.threads;
  j["deterministic"] = cfg.deterministic;
  return j.dump(2) + "\n";
}

namespace {

const std::map<std::string, std::string>& sweep_table() {
  static const std::map<std::string, std::string> t = {
      {"m", "forest.m"},
      {"k_classes", "forest.k_classes"},
      {"pca_dims", "forest.pca_dims"},
      {"discretizer", "forest.discretizer"},
      {"gain", "forest.gain"},
      {"d_in", "forest.d_in"},
      {"d_out", "forest.d_out"},
      {"n_patches", "forest.n_patches"},
      {"n_images", "forest.n_images"},
      {"positive_fraction", "forest.positive_fraction"},
      {"frac_features", "forest.frac_features"},
      {"n_trees", ""},
      {"max_depth", "forest.max_depth"},
      {"min_samples", "forest.min_samples"},
      {"n_thresholds", "forest.n_thresholds"},
      {"sharpen_steps", "detect.sharpen_steps"},
      {"multiscale", "detect.multiscale"},
      {"norm_radius", "channels.norm_radius"},
      {"grid_cells", "channels.grid_cells"},
      {"n_orients", "channels.n_orients"},
      {"channel_blur", "channels.channel_blur"},
      {"ss_blur", "channels.ss_blur"},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& sweep_parameter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : sweep_table()) v.push_back(k);
    return v;
  }();
  return names;
}

namespace {

ordered_json parse_value(const std::string& value) {
  try {
    return ordered_json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    return ordered_json(value);  // bare strings such as kmeans
  }
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const ordered_json v = parse_value(value);
  if (key == "threads") {
    cfg.threads = as<int>(v, key);
  } else if (key == "deterministic") {
    cfg.deterministic = as<bool>(v, key);
  } else if (const Field* f = find_field(key)) {
    f->set(cfg, v);
  } else {
    throw ConfigError("unknown config key \"" + key + "\"");
  }
}

void set_parameter(RunConfig& cfg, const std::string& name, const std::string& value) {
  const auto it = sweep_table().find(name);
  if (it == sweep_table().end()) {
    std::string list;
    for (const auto& n : sweep_parameter_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown sweep parameter \"" + name + "\"; valid names: " + list);
  }
  const ordered_json v = parse_value(value);
  if (name == "n_trees") {
    const int t = as<int>(v, name);
    cfg.forest.n_trees_eval = t;
    cfg.forest.n_trees_trained = 2 * t;
  } else {
    find_field(it->second)->set(cfg, v);
  }
  cfg.validate();
}

}  // namespace sedge
