#include "mmgne_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace mmgne::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const char* type_name(const Json& j) { return j.type_name(); }

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

// Converts one JSON value, naming `field` on a type mismatch.
void convert(const Json& v, const std::string& field, double& out) {
  if (!v.is_number()) throw ConfigError(field, std::string("expected a number, got ") + type_name(v));
  out = v.get<double>();
}

void convert(const Json& v, const std::string& field, int& out) {
  if (!v.is_number_integer()) throw ConfigError(field, std::string("expected an integer, got ") + type_name(v));
  out = v.get<int>();
}

void convert(const Json& v, const std::string& field, std::uint64_t& out) {
  const bool non_negative = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!non_negative) {
    throw ConfigError(field, std::string("expected a non-negative integer, got ") + type_name(v));
  }
  out = v.get<std::uint64_t>();
}

void convert(const Json& v, const std::string& field, std::string& out) {
  if (!v.is_string()) throw ConfigError(field, std::string("expected a string, got ") + type_name(v));
  out = v.get<std::string>();
}

// Reads obj[key] into out when present; `out` keeps its default otherwise.
template <typename T>
void read(const Json& obj, const std::string& path, const char* key, T& out) {
  if (obj.contains(key)) convert(obj.at(key), join(path, key), out);
}

template <typename T>
void read_list(const Json& obj, const std::string& path, const char* key, std::vector<T>& out) {
  if (!obj.contains(key)) return;
  const Json& v = obj.at(key);
  const std::string field = join(path, key);
  if (!v.is_array()) throw ConfigError(field, std::string("expected an array, got ") + type_name(v));
  out.clear();
  for (std::size_t k = 0; k < v.size(); ++k) {
    T item{};
    convert(v[k], field + "[" + std::to_string(k) + "]", item);
    out.push_back(item);
  }
}

const Json& section(const Json& root, const char* key) {
  static const Json empty = Json::object();
  return root.contains(key) ? root.at(key) : empty;
}

QosKind parse_qos_kind(const std::string& s) {
  if (s == "sinr") return QosKind::sinr_threshold;
  if (s == "outage") return QosKind::outage_probability;
  throw ConfigError("qos.kind", "expected \"sinr\" or \"outage\", got \"" + s + "\"");
}

const char* qos_kind_name(QosKind kind) { return kind == QosKind::sinr_threshold ? "sinr" : "outage"; }

TxScheme scheme_from(const std::string& field, const std::string& s) {
  try {
    return parse_tx_scheme(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
}

// Runs a module validator and reports its failure under `section`. Module
// messages read "section: key ..."; the key becomes part of the field path.
template <typename F>
void validated(const std::string& section, std::initializer_list<const char*> keys, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    std::string msg = e.what();
    const std::string prefix = section + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    const auto space = msg.find(' ');
    const std::string key = msg.substr(0, space);
    const bool is_key = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
    if (is_key && space != std::string::npos) throw ConfigError(section + "." + key, msg.substr(space + 1));
    throw ConfigError(section, msg);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  validated("topology", {"n_links", "spacing", "jitter", "link_min", "link_max"}, [&] { instance.topology.validate(); });
  validated("channel",
            {"n_clusters", "n_rays_per_cluster", "carrier_wavelength", "angle_spread", "pathloss_exponent",
             "reference_gain", "noise_variance"},
            [&] { instance.channel.validate(); });
  if (!(instance.p_min_w > 0.0)) throw ConfigError("power.p_min_w", "must be > 0");
  if (!(instance.p_max_w > instance.p_min_w)) throw ConfigError("power.p_max_w", "must exceed power.p_min_w");
  if (!std::isfinite(instance.gamma_db)) throw ConfigError("qos.gamma_db", "must be finite");
  if (instance.qos_kind == QosKind::outage_probability && !(instance.q_bar > 0.0 && instance.q_bar < 1.0)) {
    throw ConfigError("qos.q_bar", "must lie in (0, 1)");
  }
  if (!(instance.supply.alpha > 0.0)) throw ConfigError("supply.alpha_per_w", "must be > 0");
  if (!std::isfinite(instance.supply.mu)) throw ConfigError("supply.mu_w", "must be finite");
  validated("solver", {"epsilon", "delta", "max_iters", "outer_eps", "outer_cap"}, [&] { params.validate(); });
  if (params.zf.max_nulled && *params.zf.max_nulled < 0) throw ConfigError("solver.zf_max_nulled", "must be >= 0");
  if (sweep.trials < 1) throw ConfigError("sweep.trials", "must be >= 1");
  for (std::size_t k = 0; k < sweep.n_links.size(); ++k) {
    if (sweep.n_links[k] < 1) throw ConfigError("sweep.n_links[" + std::to_string(k) + "]", "must be >= 1");
  }
  for (std::size_t k = 0; k < sweep.gamma_db.size(); ++k) {
    if (!std::isfinite(sweep.gamma_db[k])) {
      throw ConfigError("sweep.gamma_db[" + std::to_string(k) + "]", "must be finite");
    }
  }
  if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

SweepConfig ExperimentConfig::sweep_config() const {
  SweepConfig sc;
  sc.base = instance;
  sc.params = params;
  sc.n_links = sweep.n_links.empty() ? std::vector<int>{instance.topology.n_links} : sweep.n_links;
  sc.gamma_db = sweep.gamma_db.empty() ? std::vector<double>{instance.gamma_db} : sweep.gamma_db;
  sc.schemes = sweep.schemes.empty() ? std::vector<TxScheme>{scheme} : sweep.schemes;
  sc.trials = sweep.trials;
  sc.master_seed = instance.seed;
  sc.jobs = jobs;
  return sc;
}

ExperimentConfig parse_config(const Json& j) {
  check_keys(j, "", {"topology", "channel", "power", "qos", "supply", "solver", "tx_scheme", "sweep", "seed",
                     "jobs", "output"});
  ExperimentConfig c;
  auto& ic = c.instance;

  const Json& topo = section(j, "topology");
  check_keys(topo, "topology", {"n_links", "spacing", "jitter", "link_min", "link_max", "k_tx", "l_rx"});
  read(topo, "topology", "n_links", ic.topology.n_links);
  read(topo, "topology", "spacing", ic.topology.spacing);
  read(topo, "topology", "jitter", ic.topology.jitter);
  read(topo, "topology", "link_min", ic.topology.link_min);
  read(topo, "topology", "link_max", ic.topology.link_max);
  read(topo, "topology", "k_tx", ic.topology.k_tx);
  read(topo, "topology", "l_rx", ic.topology.l_rx);

  const Json& chan = section(j, "channel");
  check_keys(chan, "channel", {"n_clusters", "n_rays_per_cluster", "carrier_wavelength", "angle_spread",
                               "pathloss_exponent", "reference_gain", "noise_variance"});
  read(chan, "channel", "n_clusters", ic.channel.n_clusters);
  read(chan, "channel", "n_rays_per_cluster", ic.channel.n_rays_per_cluster);
  read(chan, "channel", "carrier_wavelength", ic.channel.carrier_wavelength);
  read(chan, "channel", "angle_spread", ic.channel.angle_spread);
  read(chan, "channel", "pathloss_exponent", ic.channel.pathloss_exponent);
  read(chan, "channel", "reference_gain", ic.channel.reference_gain);
  read(chan, "channel", "noise_variance", ic.channel.noise_variance);

  if (!j.contains("power")) throw ConfigError("power", "missing required section");
  const Json& power = j.at("power");
  check_keys(power, "power", {"p_min_w", "p_max_w"});
  if (!power.contains("p_min_w")) throw ConfigError("power.p_min_w", "missing required key");
  if (!power.contains("p_max_w")) throw ConfigError("power.p_max_w", "missing required key");
  read(power, "power", "p_min_w", ic.p_min_w);
  read(power, "power", "p_max_w", ic.p_max_w);

  const Json& qos = section(j, "qos");
  check_keys(qos, "qos", {"kind", "gamma_db", "q_bar"});
  std::string kind = qos_kind_name(ic.qos_kind);
  read(qos, "qos", "kind", kind);
  ic.qos_kind = parse_qos_kind(kind);
  read(qos, "qos", "gamma_db", ic.gamma_db);
  read(qos, "qos", "q_bar", ic.q_bar);

  const Json& supply = section(j, "supply");
  check_keys(supply, "supply", {"mu_w", "alpha_per_w"});
  read(supply, "supply", "mu_w", ic.supply.mu);
  read(supply, "supply", "alpha_per_w", ic.supply.alpha);

  const Json& solver = section(j, "solver");
  check_keys(solver, "solver",
             {"epsilon", "delta", "max_iters", "update_order", "outer_eps", "outer_cap", "zf_max_nulled"});
  auto& sp = c.params.solver;
  read(solver, "solver", "epsilon", sp.epsilon);
  if (solver.contains("delta") && !solver.at("delta").is_null()) {
    double delta = 0.0;
    read(solver, "solver", "delta", delta);
    sp.delta = delta;
  }
  read(solver, "solver", "max_iters", sp.max_iters);
  std::string order = to_string(sp.update_order);
  read(solver, "solver", "update_order", order);
  try {
    sp.update_order = parse_update_order(order);
  } catch (const InvalidArgument& e) {
    throw ConfigError("solver.update_order", e.what());
  }
  read(solver, "solver", "outer_eps", c.params.outer_eps);
  read(solver, "solver", "outer_cap", c.params.outer_cap);
  if (solver.contains("zf_max_nulled") && !solver.at("zf_max_nulled").is_null()) {
    int cap = 0;
    read(solver, "solver", "zf_max_nulled", cap);
    c.params.zf.max_nulled = cap;
  }

  std::string scheme = to_string(c.scheme);
  read(j, "", "tx_scheme", scheme);
  c.scheme = scheme_from("tx_scheme", scheme);
  read(j, "", "seed", ic.seed);
  read(j, "", "jobs", c.jobs);

  const Json& sweep = section(j, "sweep");
  check_keys(sweep, "sweep", {"n_links", "gamma_db", "schemes", "trials"});
  read_list(sweep, "sweep", "n_links", c.sweep.n_links);
  read_list(sweep, "sweep", "gamma_db", c.sweep.gamma_db);
  std::vector<std::string> schemes;
  read_list(sweep, "sweep", "schemes", schemes);
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    c.sweep.schemes.push_back(scheme_from("sweep.schemes[" + std::to_string(k) + "]", schemes[k]));
  }
  read(sweep, "sweep", "trials", c.sweep.trials);

  const Json& out = section(j, "output");
  check_keys(out, "output", {"dir", "trace", "sweep_csv", "fit_report"});
  read(out, "output", "dir", c.output.dir);
  read(out, "output", "trace", c.output.trace);
  read(out, "output", "sweep_csv", c.output.sweep_csv);
  read(out, "output", "fit_report", c.output.fit_report);

  c.validate();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  const auto& ic = c.instance;
  Json j;
  j["topology"] = {{"n_links", ic.topology.n_links}, {"spacing", ic.topology.spacing},
                   {"jitter", ic.topology.jitter},   {"link_min", ic.topology.link_min},
                   {"link_max", ic.topology.link_max}, {"k_tx", ic.topology.k_tx},
                   {"l_rx", ic.topology.l_rx}};
  j["channel"] = {{"n_clusters", ic.channel.n_clusters},
                  {"n_rays_per_cluster", ic.channel.n_rays_per_cluster},
                  {"carrier_wavelength", ic.channel.carrier_wavelength},
                  {"angle_spread", ic.channel.angle_spread},
                  {"pathloss_exponent", ic.channel.pathloss_exponent},
                  {"reference_gain", ic.channel.reference_gain},
                  {"noise_variance", ic.channel.noise_variance}};
  j["power"] = {{"p_min_w", ic.p_min_w}, {"p_max_w", ic.p_max_w}};
  j["qos"] = {{"kind", qos_kind_name(ic.qos_kind)}, {"gamma_db", ic.gamma_db}, {"q_bar", ic.q_bar}};
  j["supply"] = {{"mu_w", ic.supply.mu}, {"alpha_per_w", ic.supply.alpha}};
  const auto& sp = c.params.solver;
  j["solver"] = {{"epsilon", sp.epsilon},
                 {"delta", sp.delta ? Json(*sp.delta) : Json(nullptr)},
                 {"max_iters", sp.max_iters},
                 {"update_order", to_string(sp.update_order)},
                 {"outer_eps", c.params.outer_eps},
                 {"outer_cap", c.params.outer_cap},
                 {"zf_max_nulled", c.params.zf.max_nulled ? Json(*c.params.zf.max_nulled) : Json(nullptr)}};
  j["tx_scheme"] = to_string(c.scheme);
  j["seed"] = ic.seed;
  j["jobs"] = c.jobs;
  Json schemes = Json::array();
  for (auto s : c.sweep.schemes) schemes.push_back(to_string(s));
  j["sweep"] = {{"n_links", c.sweep.n_links}, {"gamma_db", c.sweep.gamma_db}, {"schemes", schemes},
                {"trials", c.sweep.trials}};
  j["output"] = {{"dir", c.output.dir}, {"trace", c.output.trace}, {"sweep_csv", c.output.sweep_csv},
                 {"fit_report", c.output.fit_report}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace mmgne::cli
