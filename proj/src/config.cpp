#include "epirep/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "epirep/error.hpp"

namespace epirep {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Epidemic: return "epidemic";
    case Strategy::Random: return "random";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct BadValue {
  std::string expected;
};

double read_double(std::string_view v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) throw BadValue{"a number"};
  return out;
}

template <class Int>
Int read_int(std::string_view v) {
  Int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw BadValue{std::is_signed_v<Int> ? "an integer" : "a non-negative integer"};
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(WorldConfig&, std::string_view)> set;
  std::function<std::string(const WorldConfig&)> get;
};

template <class Acc>
Field real(std::string key, Acc acc) {
  return {std::move(key), [acc](WorldConfig& c, std::string_view v) { acc(c) = read_double(v); },
          [acc](const WorldConfig& c) { return format_double(acc(const_cast<WorldConfig&>(c))); }};
}

template <class Int, class Acc>
Field integer(std::string key, Acc acc) {
  return {std::move(key), [acc](WorldConfig& c, std::string_view v) { acc(c) = read_int<Int>(v); },
          [acc](const WorldConfig& c) {
            return std::to_string(acc(const_cast<WorldConfig&>(c)));
          }};
}

const std::vector<Field>& registry() {
  static const std::vector<Field> fields = [] {
    using C = WorldConfig;
    std::vector<Field> f;
    f.push_back(integer<std::size_t>("node_count", [](C& c) -> auto& { return c.node_count; }));
    f.push_back(real("region.width", [](C& c) -> auto& { return c.region.width; }));
    f.push_back(real("region.height", [](C& c) -> auto& { return c.region.height; }));
    f.push_back(real("radio_range", [](C& c) -> auto& { return c.radio_range; }));
    f.push_back(integer<Tick>("ticks", [](C& c) -> auto& { return c.ticks; }));
    f.push_back(integer<std::uint64_t>("seed", [](C& c) -> auto& { return c.seed; }));
    f.push_back({"strategy",
                 [](C& c, std::string_view v) {
                   if (v == "epidemic") c.strategy = Strategy::Epidemic;
                   else if (v == "random") c.strategy = Strategy::Random;
                   else throw BadValue{"one of epidemic, random"};
                 },
                 [](const C& c) { return std::string(to_string(c.strategy)); }});
    f.push_back(integer<std::size_t>("file_count", [](C& c) -> auto& { return c.file_count; }));
    f.push_back(
        integer<std::size_t>("chunks_per_file", [](C& c) -> auto& { return c.chunks_per_file; }));
    f.push_back(real("chunk_bytes", [](C& c) -> auto& { return c.chunk_bytes; }));
    f.push_back(real("packet_bytes", [](C& c) -> auto& { return c.packet_bytes; }));
    f.push_back(real("workload", [](C& c) -> auto& { return c.workload; }));
    f.push_back(real("sensitive_fraction", [](C& c) -> auto& { return c.sensitive_fraction; }));
    f.push_back(
        integer<std::size_t>("initial_replicas", [](C& c) -> auto& { return c.initial_replicas; }));
    f.push_back(real("retention_fraction", [](C& c) -> auto& { return c.retention_fraction; }));
    f.push_back(real("w_max", [](C& c) -> auto& { return c.w_max; }));
    f.push_back(integer<Tick>("h_window", [](C& c) -> auto& { return c.h_window; }));
    f.push_back(integer<Tick>("probation_ticks", [](C& c) -> auto& { return c.probation_ticks; }));
    f.push_back(
        integer<unsigned>("zone_radius_hops", [](C& c) -> auto& { return c.zone_radius_hops; }));
    f.push_back(integer<std::size_t>("min_cluster_density",
                                     [](C& c) -> auto& { return c.min_cluster_density; }));
    f.push_back(real("lookup_delay", [](C& c) -> auto& { return c.lookup_delay; }));
    f.push_back(real("bandwidth", [](C& c) -> auto& { return c.bandwidth; }));

    f.push_back(real("epidemic.beta", [](C& c) -> auto& { return c.epidemic.beta; }));
    f.push_back(real("epidemic.gamma", [](C& c) -> auto& { return c.epidemic.gamma; }));
    f.push_back(real("epidemic.lambda", [](C& c) -> auto& { return c.epidemic.lambda; }));
    f.push_back(real("epidemic.tau", [](C& c) -> auto& { return c.epidemic.tau; }));
    f.push_back(integer<Tick>("epidemic.t1", [](C& c) -> auto& { return c.epidemic.t1; }));
    f.push_back(integer<Tick>("epidemic.t2", [](C& c) -> auto& { return c.epidemic.t2; }));
    f.push_back(integer<unsigned>("epidemic.fanout", [](C& c) -> auto& { return c.epidemic.fanout; }));
    f.push_back(
        real("epidemic.hosting_time", [](C& c) -> auto& { return c.epidemic.hosting_time; }));
    f.push_back({"epidemic.hazard",
                 [](C& c, std::string_view v) {
                   if (v == "saturating") c.epidemic.hazard = PurgeHazard::Saturating;
                   else if (v == "linear") c.epidemic.hazard = PurgeHazard::Linear;
                   else throw BadValue{"one of saturating, linear"};
                 },
                 [](const C& c) {
                   return std::string(c.epidemic.hazard == PurgeHazard::Linear ? "linear"
                                                                               : "saturating");
                 }});

    f.push_back(real("hop_delay.base", [](C& c) -> auto& { return c.hop_delay.base; }));
    f.push_back(real("hop_delay.per_byte", [](C& c) -> auto& { return c.hop_delay.per_byte; }));
    f.push_back(real("hop_delay.jitter_std", [](C& c) -> auto& { return c.hop_delay.jitter_std; }));
    f.push_back(real("hop_delay.loss_prob", [](C& c) -> auto& { return c.hop_delay.loss_prob; }));
    f.push_back(integer<unsigned>("hop_delay.retry_budget",
                                  [](C& c) -> auto& { return c.hop_delay.retry_budget; }));
    f.push_back(integer<Tick>("hop_delay.route_patience",
                              [](C& c) -> auto& { return c.hop_delay.route_patience; }));

    f.push_back(real("mobility.speed_min", [](C& c) -> auto& { return c.mobility.speed_min; }));
    f.push_back(real("mobility.speed_max", [](C& c) -> auto& { return c.mobility.speed_max; }));
    f.push_back(real("mobility.dwell_mean", [](C& c) -> auto& { return c.mobility.dwell_mean; }));

    f.push_back(real("energy.min", [](C& c) -> auto& { return c.energy.min; }));
    f.push_back(real("energy.max", [](C& c) -> auto& { return c.energy.max; }));
    f.push_back(real("energy.per_packet", [](C& c) -> auto& { return c.energy.per_packet; }));

    f.push_back(integer<unsigned>("capacity.min", [](C& c) -> auto& { return c.capacity.min; }));
    f.push_back(integer<unsigned>("capacity.max", [](C& c) -> auto& { return c.capacity.max; }));

    f.push_back(real("reachability.decay", [](C& c) -> auto& { return c.reachability.decay; }));
    f.push_back(
        real("reachability.exponent", [](C& c) -> auto& { return c.reachability.exponent; }));

    f.push_back(real("community.w_fixed", [](C& c) -> auto& { return c.community.w_fixed; }));
    f.push_back(integer<std::size_t>("community.feedback_k",
                                     [](C& c) -> auto& { return c.community.feedback_k; }));

    f.push_back(
        integer<std::size_t>("deletions.count", [](C& c) -> auto& { return c.deletions.count; }));
    f.push_back(integer<Tick>("deletions.at", [](C& c) -> auto& { return c.deletions.at; }));
    return f;
  }();
  return fields;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : registry()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

// Leading "epidemic.beta must ..." names the key; recover it for ConfigError.
std::string key_of_message(const std::string& msg) {
  const auto sp = msg.find(' ');
  return msg.substr(0, sp);
}

}  // namespace

std::size_t WorldConfig::packets_per_chunk() const {
  if (!(packet_bytes > 0) || !(chunk_bytes > 0)) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(chunk_bytes / packet_bytes)));
}

std::vector<std::string> WorldConfig::violations() const {
  std::vector<std::string> out;
  auto need = [&](bool ok, const char* msg) {
    if (!ok) out.emplace_back(msg);
  };
  need(node_count >= 1, "node_count must be >= 1");
  need(region.width > 0 && std::isfinite(region.width), "region.width must be > 0");
  need(region.height > 0 && std::isfinite(region.height), "region.height must be > 0");
  need(radio_range > 0, "radio_range must be > 0");
  need(ticks >= 0, "ticks must be >= 0");
  need(file_count >= 1, "file_count must be >= 1");
  need(chunks_per_file >= 1, "chunks_per_file must be >= 1");
  need(chunk_bytes > 0 && std::isfinite(chunk_bytes), "chunk_bytes must be > 0");
  need(packet_bytes > 0 && std::isfinite(packet_bytes), "packet_bytes must be > 0");
  need(workload >= 0 && std::isfinite(workload), "workload must be >= 0");
  need(sensitive_fraction >= 0 && sensitive_fraction <= 1, "sensitive_fraction must be in [0,1]");
  need(initial_replicas >= 1, "initial_replicas must be >= 1");
  need(initial_replicas <= node_count, "initial_replicas must be <= node_count");
  need(retention_fraction >= 0 && retention_fraction <= 1, "retention_fraction must be in [0,1]");
  need(w_max > 0 && std::isfinite(w_max), "w_max must be > 0");
  need(h_window >= 1, "h_window must be >= 1");
  need(probation_ticks >= 0, "probation_ticks must be >= 0");
  need(zone_radius_hops >= 1, "zone_radius_hops must be >= 1");
  need(lookup_delay >= 0 && std::isfinite(lookup_delay), "lookup_delay must be >= 0");
  need(bandwidth > 0, "bandwidth must be > 0");
  for (auto& v : epidemic.violations()) out.push_back(std::move(v));
  for (auto& v : hop_delay.violations()) out.push_back(std::move(v));
  need(mobility.speed_min >= 0, "mobility.speed_min must be >= 0");
  need(mobility.speed_max >= mobility.speed_min, "mobility.speed_max must be >= speed_min");
  need(mobility.dwell_mean > 0, "mobility.dwell_mean must be > 0");
  need(energy.min > 0, "energy.min must be > 0");
  need(energy.max >= energy.min, "energy.max must be >= energy.min");
  need(energy.per_packet >= 0, "energy.per_packet must be >= 0");
  need(capacity.min >= 1, "capacity.min must be >= 1");
  need(capacity.max >= capacity.min, "capacity.max must be >= capacity.min");
  need(reachability.decay > 0, "reachability.decay must be > 0");
  need(reachability.exponent > 0, "reachability.exponent must be > 0");
  need(std::isfinite(community.w_fixed), "community.w_fixed must be finite");
  need(deletions.count <= chunk_count(), "deletions.count must be <= chunk count");
  need(deletions.at >= 0, "deletions.at must be >= 0");
  return out;
}

void WorldConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid configuration:";
  for (const auto& s : v) msg << "\n  " << s;
  throw ConfigError(key_of_message(v.front()), 0, msg.str());
}

void set_config_value(WorldConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError(std::string(key), 0, "unknown key '" + std::string(key) + "'");
  try {
    f->set(config, trim(value));
  } catch (const BadValue& e) {
    throw ConfigError(std::string(key), 0,
                      "key '" + std::string(key) + "' expects " + e.expected + ", got '" +
                          std::string(value) + "'");
  }
}

std::string get_config_value(const WorldConfig& config, std::string_view key) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError(std::string(key), 0, "unknown key '" + std::string(key) + "'");
  return f->get(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : registry()) out.push_back(f.key);
  return out;
}

WorldConfig parse_config(std::string_view text) {
  WorldConfig config;
  std::vector<std::pair<std::string, int>> seen;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), line_no,
                        "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto where = "line " + std::to_string(line_no) + ": ";

    const Field* f = find_field(key);
    if (!f) throw ConfigError(key, line_no, where + "unknown key '" + key + "'");
    for (const auto& [k, l] : seen) {
      if (k == key) {
        throw ConfigError(key, line_no,
                          where + "duplicate key '" + key + "' (first on line " +
                              std::to_string(l) + ")");
      }
    }
    seen.emplace_back(key, line_no);
    try {
      f->set(config, value);
    } catch (const BadValue& e) {
      throw ConfigError(key, line_no,
                        where + "key '" + key + "' expects " + e.expected + ", got '" +
                            std::string(value) + "'");
    }
  }

  const auto v = config.violations();
  if (!v.empty()) {
    const std::string key = key_of_message(v.front());
    int line = 0;
    for (const auto& [k, l] : seen) {
      if (k == key) line = l;
    }
    std::ostringstream msg;
    if (line > 0) msg << "line " << line << ": ";
    msg << "invalid configuration:";
    for (const auto& s : v) msg << "\n  " << s;
    throw ConfigError(key, line, msg.str());
  }
  return config;
}

std::string emit_config(const WorldConfig& config) {
  std::string out;
  for (const auto& f : registry()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace epirep
