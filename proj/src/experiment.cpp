#include "procache/experiment.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace procache {

bool row_before(const ResultRow& a, const ResultRow& b) {
  auto key = [](const ResultRow& r) {
    return std::tuple(r.scheme, r.skew, r.mc_over_tc, r.tc, r.gamma, r.is_mean(), r.seed.value_or(0));
  };
  return key(a) < key(b);
}

Summary aggregate(const std::vector<double>& values, double confidence) {
  if (values.empty()) throw std::invalid_argument("aggregate needs at least one value");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  Summary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  boost::math::students_t dist(static_cast<double>(s.n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
  s.ci_halfwidth = t * s.stddev / std::sqrt(static_cast<double>(s.n));
  return s;
}

std::shared_ptr<Topology> build_topology(const ExperimentConfig& config) {
  try {
    Rng rng(derive_seed(config.topology_seed, 0x70b0));
    Graph g = config.topology_file.empty() ? synthesize_as_graph(config.topology_nodes, rng)
                                           : load_edge_list(config.topology_file);
    auto topo = std::make_shared<Topology>(build_internet_topology(std::move(g)));
    form_neighborhoods(*topo, config.neighborhoods, config.attachment_points, rng);
    return topo;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
}

SimConfig sim_config_for(const ExperimentConfig& config, Skewness skew, double mid_share, std::int64_t total_cache,
                         double gamma, const Topology* topology) {
  SimConfig s;
  s.topology_kind = config.topology;
  s.topology = topology;
  s.mobiles = config.mobiles;
  s.attachment_points = config.attachment_points;
  s.skew = skew;
  s.perturbation_sd = config.perturbation_sd;
  if (config.switch_at > 0) s.profile_switch = ProfileSwitch{config.switch_at, config.switch_to};
  s.delay_local = config.delay_unit;
  s.delay_mid = config.delay_unit * config.mid_ratio;
  s.delay_remote = config.delay_unit * config.remote_ratio;
  s.total_cache = total_cache;
  s.mid_share = mid_share;
  s.gamma = gamma;
  s.initial_price = config.initial_price;
  s.demand = config.demand;
  s.dwell_mean = config.dwell_mean;
  s.smoothing = config.smoothing;
  s.popularity = config.popularity;
  s.estimate_probabilities = config.estimate_probabilities;
  s.handoffs = config.handoffs;
  s.warmup = config.warmup;
  return s;
}

bool scheme_applicable(SchemeKind scheme, double mid_share) {
  return scheme != SchemeKind::Optimal || mid_share == 0.0 || mid_share == 1.0;
}

ResultRow run_point(const ExperimentConfig& config, SchemeKind scheme, Skewness skew, double mid_share,
                    std::int64_t total_cache, double gamma, std::uint64_t seed, const Topology* topology) {
  const SimConfig sim = sim_config_for(config, skew, mid_share, total_cache, gamma, topology);
  const RunMetrics m = run(sim, scheme, seed);
  ResultRow row;
  row.scheme = to_string(scheme);
  row.skew = to_string(skew);
  row.mc_over_tc = mid_share;
  row.tc = total_cache;
  row.gamma = gamma;
  row.seed = seed;
  row.gain = m.gain();
  row.avg_delay = m.avg_delay() / config.delay_unit;
  return row;
}

std::vector<ResultRow> with_means(std::vector<ResultRow> rows) {
  std::map<std::tuple<std::string, std::string, double, std::int64_t, double>, std::vector<const ResultRow*>> points;
  for (const auto& r : rows)
    if (!r.is_mean()) points[{r.scheme, r.skew, r.mc_over_tc, r.tc, r.gamma}].push_back(&r);
  std::vector<ResultRow> means;
  for (const auto& [key, group] : points) {
    std::vector<double> gains, delays;
    for (const auto* r : group) {
      gains.push_back(r->gain);
      delays.push_back(r->avg_delay);
    }
    const Summary g = aggregate(gains);
    ResultRow m;
    std::tie(m.scheme, m.skew, m.mc_over_tc, m.tc, m.gamma) = key;
    m.gain = g.mean;
    m.avg_delay = aggregate(delays).mean;
    m.ci_halfwidth = g.ci_halfwidth;
    means.push_back(m);
  }
  rows.insert(rows.end(), means.begin(), means.end());
  std::sort(rows.begin(), rows.end(), row_before);
  return rows;
}

std::vector<ResultRow> sweep(const ExperimentConfig& config, const Progress& progress) {
  config.validate();
  std::shared_ptr<Topology> topology;
  if (config.topology == Topology::Kind::InternetScaled) topology = build_topology(config);
  std::vector<ResultRow> rows;
  for (auto scheme : config.schemes)
    for (auto skew : config.skews)
      for (double share : config.mid_share) {
        if (!scheme_applicable(scheme, share)) continue;
        for (auto tc : config.total_cache)
          for (double gamma : config.gamma)
            for (auto seed : config.seeds) {
              rows.push_back(run_point(config, scheme, skew, share, tc, gamma, seed, topology.get()));
              if (progress) progress(rows.back());
            }
      }
  return with_means(std::move(rows));
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  }
}

}  // namespace

void emit_csv(std::vector<ResultRow> rows, std::ostream& out) {
  std::sort(rows.begin(), rows.end(), row_before);
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.skew << ',' << num(r.mc_over_tc) << ',' << r.tc << ',' << num(r.gamma) << ','
        << (r.seed ? std::to_string(*r.seed) : std::string("mean")) << ',' << num(r.gain) << ',' << num(r.avg_delay)
        << ',' << (r.ci_halfwidth ? num(*r.ci_halfwidth) : std::string()) << '\n';
  }
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  emit_csv(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<ResultRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("missing or unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 9) throw std::invalid_argument("expected 9 columns: '" + line + "'");
    ResultRow r;
    r.scheme = cells[0];
    r.skew = cells[1];
    r.mc_over_tc = parse_double(cells[2], "mc_over_tc");
    r.tc = static_cast<std::int64_t>(parse_double(cells[3], "tc"));
    r.gamma = parse_double(cells[4], "gamma");
    if (cells[5] != "mean") r.seed = static_cast<std::uint64_t>(std::stoull(cells[5]));
    r.gain = parse_double(cells[6], "gain");
    r.avg_delay = parse_double(cells[7], "avg_delay");
    if (!cells[8].empty()) r.ci_halfwidth = parse_double(cells[8], "ci_halfwidth");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace procache
