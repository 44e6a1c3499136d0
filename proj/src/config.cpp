#include "procache/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace procache {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

double to_double(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("not a number: '" + v + "'");
  return out;
}

template <typename T>
T to_integer(const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  std::string l = v;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

// Percent suffix allowed for shares: "25%" == 0.25.
double to_fraction(const std::string& v) {
  if (!v.empty() && v.back() == '%') return to_double(trim(v.substr(0, v.size() - 1))) / 100.0;
  return to_double(v);
}

template <typename T, typename F>
std::vector<T> map_list(const std::string& value, F f) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(f(item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

using Setter = void (*)(ExperimentConfig&, const std::string&);
using Getter = std::string (*)(const ExperimentConfig&);

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"topology",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "fixed") c.topology = Topology::Kind::FixedDelay;
         else if (v == "internet") c.topology = Topology::Kind::InternetScaled;
         else throw ConfigError("topology must be 'fixed' or 'internet'");
       },
       [](const ExperimentConfig& c) -> std::string {
         return c.topology == Topology::Kind::FixedDelay ? "fixed" : "internet";
       }},
      {"topology_file", [](ExperimentConfig& c, const std::string& v) { c.topology_file = v; },
       [](const ExperimentConfig& c) { return c.topology_file; }},
      {"topology_nodes", [](ExperimentConfig& c, const std::string& v) { c.topology_nodes = to_integer<std::size_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.topology_nodes); }},
      {"topology_seed", [](ExperimentConfig& c, const std::string& v) { c.topology_seed = to_integer<std::uint64_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.topology_seed); }},
      {"neighborhoods", [](ExperimentConfig& c, const std::string& v) { c.neighborhoods = to_integer<std::size_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.neighborhoods); }},
      {"schemes",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.schemes = map_list<SchemeKind>(v, [](const std::string& s) { return parse_scheme(s); });
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       },
       [](const ExperimentConfig& c) {
         std::vector<std::string> names;
         for (auto s : c.schemes) names.push_back(to_string(s));
         return join(names);
       }},
      {"skew",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.skews = map_list<Skewness>(v, [](const std::string& s) { return parse_skewness(s); });
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       },
       [](const ExperimentConfig& c) {
         std::vector<std::string> names;
         for (auto s : c.skews) names.push_back(to_string(s));
         return join(names);
       }},
      {"perturbation_sd", [](ExperimentConfig& c, const std::string& v) { c.perturbation_sd = to_fraction(v); },
       [](const ExperimentConfig& c) { return fmt(c.perturbation_sd); }},
      {"delay_unit", [](ExperimentConfig& c, const std::string& v) { c.delay_unit = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.delay_unit); }},
      {"mid_ratio", [](ExperimentConfig& c, const std::string& v) { c.mid_ratio = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.mid_ratio); }},
      {"remote_ratio", [](ExperimentConfig& c, const std::string& v) { c.remote_ratio = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.remote_ratio); }},
      {"total_cache",
       [](ExperimentConfig& c, const std::string& v) { c.total_cache = map_list<std::int64_t>(v, to_integer<std::int64_t>); },
       [](const ExperimentConfig& c) { return join(c.total_cache); }},
      {"mid_share", [](ExperimentConfig& c, const std::string& v) { c.mid_share = map_list<double>(v, to_fraction); },
       [](const ExperimentConfig& c) { return join(c.mid_share); }},
      {"gamma", [](ExperimentConfig& c, const std::string& v) { c.gamma = map_list<double>(v, to_double); },
       [](const ExperimentConfig& c) { return join(c.gamma); }},
      {"initial_price", [](ExperimentConfig& c, const std::string& v) { c.initial_price = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.initial_price); }},
      {"demand",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "active") c.demand = DemandMeasure::ActiveSet;
         else if (v == "arrival") c.demand = DemandMeasure::Arrival;
         else throw ConfigError("demand must be 'active' or 'arrival'");
       },
       [](const ExperimentConfig& c) -> std::string {
         return c.demand == DemandMeasure::ActiveSet ? "active" : "arrival";
       }},
      {"mobiles", [](ExperimentConfig& c, const std::string& v) { c.mobiles = to_integer<std::size_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.mobiles); }},
      {"attachment_points",
       [](ExperimentConfig& c, const std::string& v) { c.attachment_points = to_integer<std::size_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.attachment_points); }},
      {"dwell_mean", [](ExperimentConfig& c, const std::string& v) { c.dwell_mean = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.dwell_mean); }},
      {"smoothing", [](ExperimentConfig& c, const std::string& v) { c.smoothing = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.smoothing); }},
      {"popularity", [](ExperimentConfig& c, const std::string& v) { c.popularity = to_double(v); },
       [](const ExperimentConfig& c) { return fmt(c.popularity); }},
      {"estimate_probabilities",
       [](ExperimentConfig& c, const std::string& v) { c.estimate_probabilities = to_bool(v); },
       [](const ExperimentConfig& c) -> std::string { return c.estimate_probabilities ? "true" : "false"; }},
      {"switch_at", [](ExperimentConfig& c, const std::string& v) { c.switch_at = to_integer<std::uint64_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.switch_at); }},
      {"switch_to",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.switch_to = parse_skewness(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       },
       [](const ExperimentConfig& c) { return to_string(c.switch_to); }},
      {"seeds", [](ExperimentConfig& c, const std::string& v) { c.seeds = map_list<std::uint64_t>(v, to_integer<std::uint64_t>); },
       [](const ExperimentConfig& c) { return join(c.seeds); }},
      {"handoffs", [](ExperimentConfig& c, const std::string& v) { c.handoffs = to_integer<std::uint64_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.handoffs); }},
      {"warmup", [](ExperimentConfig& c, const std::string& v) { c.warmup = to_integer<std::uint64_t>(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.warmup); }},
      {"output_dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
       [](const ExperimentConfig& c) { return c.output_dir; }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (skews.empty()) throw ConfigError("skew must not be empty");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (gamma.empty() || total_cache.empty() || mid_share.empty()) throw ConfigError("grids must not be empty");
  for (double s : mid_share)
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("mid_share values must lie in [0, 1]");
  for (double g : gamma)
    if (!(g > 0.0)) throw ConfigError("gamma values must be positive");
  for (auto tc : total_cache)
    if (tc < 0) throw ConfigError("total_cache values must be nonnegative");
  if (handoffs <= warmup) throw ConfigError("handoffs must exceed warmup");
  if (!(delay_unit > 0.0)) throw ConfigError("delay_unit must be positive");
  if (!(mid_ratio > 1.0)) throw ConfigError("mid_ratio must exceed 1");
  if (topology == Topology::Kind::FixedDelay && !(remote_ratio > mid_ratio))
    throw ConfigError("remote_ratio must exceed mid_ratio");
  if (!(perturbation_sd >= 0.0)) throw ConfigError("perturbation_sd must be nonnegative");
  if (mobiles == 0) throw ConfigError("mobiles must be positive");
  if (attachment_points != 8) throw ConfigError("skew sets are defined for 8 attachment points");
  if (topology == Topology::Kind::InternetScaled && neighborhoods == 0)
    throw ConfigError("neighborhoods must be positive");
  if (switch_at != 0 && switch_at >= handoffs) throw ConfigError("switch_at must fall inside the run");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, trim(value));
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void apply_env_overrides(ExperimentConfig& config, const EnvLookup& lookup) {
  for (const auto& f : fields()) {
    std::string name = "PROCACHE_";
    for (const char* p = f.key; *p; ++p) name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (auto v = lookup(name)) {
      try {
        f.set(config, trim(*v));
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

void apply_env_overrides(ExperimentConfig& config) {
  apply_env_overrides(config, [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  });
}

std::string render_config(const ExperimentConfig& config) {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.key << " = " << f.get(config) << '\n';
  return os.str();
}

}  // namespace procache
