#pragma once

// JSON experiment configuration.
//
//   {
//     "mechanism": "pps" | "ppss",
//     "platform": {"p", "b", "k", "lambda", "N", "eps_k", "subsidy_clamp_nonneg"},
//     "miners": [{"capacity": A,
//                 "cost": {"family": "linear", "r"} | {"family": "power", "c", "q"},
//                 "policy": {"kind": "static", "a"}
//                         | {"kind": "myopic_br", "grid_points", "replicas"}
//                         | {"kind": "delta_adaptive", "step", "floor"}}],
//     "demand": {"family": "constant", "M"} | {"family": "uniform", "lo", "hi"}
//             | {"family": "gamma", "shape", "rate"} | {"family": "lognormal", "mu", "sigma"},
//     "rounds", "replicas", "seed", "grid_points",
//     "audit": {"theta", "gamma"}
//   }
//
// "miners" and "demand" are required; everything else has a default. Unknown
// keys are rejected.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include <json.hpp>

#include "poolsim/error.hpp"
#include "poolsim/sim.hpp"

namespace poolsim {

using Json = nlohmann::json;

namespace detail {

class JsonReader {
 public:
  JsonReader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, _] : node_.items()) {
      bool known = false;
      for (auto k : keys) known = known || k == key;
      if (!known) throw ConfigError(path_ + "/" + key, "unknown field");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const Json& at(const std::string& key) const {
    if (!node_.contains(key)) throw ConfigError(path_ + "/" + key, "missing required field");
    return node_.at(key);
  }

  std::string child(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_number()) throw ConfigError(child(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    const bool non_negative =
        v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!non_negative) throw ConfigError(child(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  const Json& node_;
  std::string path_;
};

inline PlatformParams parse_platform(const Json& node) {
  JsonReader r(node, "/platform");
  r.allow_only({"p", "b", "k", "lambda", "N", "eps_k", "subsidy_clamp_nonneg"});
  PlatformParams p;
  p.p = r.number("p", p.p);
  p.b = r.number("b", p.b);
  p.k = r.number("k", p.k);
  p.lambda = r.number("lambda", p.lambda);
  const std::uint64_t n = r.unsigned_int("N", static_cast<std::uint64_t>(p.N));
  if (n < 1 || n > 1'000'000) throw ConfigError("/platform/N", "must lie in [1, 1000000]");
  p.N = static_cast<int>(n);
  p.eps_k = r.number("eps_k", p.eps_k);
  p.subsidy_clamp_nonneg = r.boolean("subsidy_clamp_nonneg", p.subsidy_clamp_nonneg);
  return p;
}

inline CostFunction parse_cost(const Json& node, const std::string& path) {
  JsonReader r(node, path);
  const std::string family = r.string("family");
  if (family == "linear") {
    r.allow_only({"family", "r"});
    return LinearCost{r.number("r")};
  }
  if (family == "power") {
    r.allow_only({"family", "c", "q"});
    return PowerCost{r.number("c"), r.number("q")};
  }
  throw ConfigError(path + "/family", "expected \"linear\" or \"power\"");
}

inline MinerPolicy parse_policy(const Json& node, const std::string& path, double capacity) {
  JsonReader r(node, path);
  const std::string kind = r.string("kind");
  if (kind == "static") {
    r.allow_only({"kind", "a"});
    return StaticPolicy{r.number("a", capacity)};
  }
  if (kind == "myopic_br") {
    r.allow_only({"kind", "grid_points", "replicas"});
    MyopicBrPolicy p;
    p.grid_points = r.unsigned_int("grid_points", p.grid_points);
    p.replicas = r.unsigned_int("replicas", p.replicas);
    return p;
  }
  if (kind == "delta_adaptive") {
    r.allow_only({"kind", "step", "floor"});
    DeltaAdaptivePolicy p;
    p.step = r.number("step", p.step);
    p.floor = r.number("floor", p.floor);
    return p;
  }
  throw ConfigError(path + "/kind", "expected \"static\", \"myopic_br\" or \"delta_adaptive\"");
}

inline MinerSetup parse_miner(const Json& node, const std::string& path) {
  JsonReader r(node, path);
  r.allow_only({"capacity", "cost", "policy"});
  MinerSetup m;
  m.capacity = r.number("capacity");
  m.cost = parse_cost(r.at("cost"), r.child("cost"));
  m.policy = r.has("policy") ? parse_policy(r.at("policy"), r.child("policy"), m.capacity)
                             : MinerPolicy{StaticPolicy{m.capacity}};
  return m;
}

inline DemandModel parse_demand(const Json& node) {
  JsonReader r(node, "/demand");
  const std::string family = r.string("family");
  if (family == "constant") {
    r.allow_only({"family", "M"});
    return ConstantDemand{r.number("M")};
  }
  if (family == "uniform") {
    r.allow_only({"family", "lo", "hi"});
    return UniformDemand{r.number("lo"), r.number("hi")};
  }
  if (family == "gamma") {
    r.allow_only({"family", "shape", "rate"});
    return GammaDemand{r.number("shape"), r.number("rate")};
  }
  if (family == "lognormal") {
    r.allow_only({"family", "mu", "sigma"});
    return LogNormalDemand{r.number("mu"), r.number("sigma")};
  }
  throw ConfigError("/demand/family", "expected \"constant\", \"uniform\", \"gamma\" or \"lognormal\"");
}

}  // namespace detail

/// Parses and validates. Throws ConfigError naming the offending field.
inline ExperimentConfig config_from_json(const Json& root) {
  detail::JsonReader r(root, "");
  r.allow_only({"mechanism", "platform", "miners", "demand", "rounds", "replicas", "seed",
                "grid_points", "audit"});
  ExperimentConfig cfg;
  if (r.has("mechanism")) {
    const std::string m = r.string("mechanism");
    if (m == "pps")
      cfg.mechanism = Mechanism::pps;
    else if (m == "ppss")
      cfg.mechanism = Mechanism::ppss;
    else
      throw ConfigError("/mechanism", "expected \"pps\" or \"ppss\"");
  }
  if (r.has("platform")) cfg.platform = detail::parse_platform(r.at("platform"));

  const Json& miners = r.at("miners");
  if (!miners.is_array()) throw ConfigError("/miners", "expected an array");
  for (std::size_t i = 0; i < miners.size(); ++i)
    cfg.miners.push_back(detail::parse_miner(miners[i], "/miners/" + std::to_string(i)));

  cfg.demand = detail::parse_demand(r.at("demand"));
  cfg.rounds = r.unsigned_int("rounds", cfg.rounds);
  cfg.replicas = r.unsigned_int("replicas", cfg.replicas);
  cfg.seed = r.unsigned_int("seed", cfg.seed);
  cfg.grid_points = r.unsigned_int("grid_points", cfg.grid_points);
  if (r.has("audit")) {
    detail::JsonReader a(r.at("audit"), "/audit");
    a.allow_only({"theta", "gamma"});
    cfg.audit.theta = a.number("theta", cfg.audit.theta);
    cfg.audit.gamma = a.number("gamma", cfg.audit.gamma);
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(root);
}

/// Explicit JSON for every field; parse(to_json(c)) == c.
inline Json config_to_json(const ExperimentConfig& cfg) {
  Json root;
  root["mechanism"] = std::string(to_string(cfg.mechanism));
  const auto& p = cfg.platform;
  root["platform"] = {{"p", p.p},           {"b", p.b},         {"k", p.k},
                      {"lambda", p.lambda}, {"N", p.N},         {"eps_k", p.eps_k},
                      {"subsidy_clamp_nonneg", p.subsidy_clamp_nonneg}};
  Json miners = Json::array();
  for (const auto& m : cfg.miners) {
    Json mj;
    mj["capacity"] = m.capacity;
    if (const auto* lin = std::get_if<LinearCost>(&m.cost))
      mj["cost"] = {{"family", "linear"}, {"r", lin->r}};
    else {
      const auto& pw = std::get<PowerCost>(m.cost);
      mj["cost"] = {{"family", "power"}, {"c", pw.c}, {"q", pw.q}};
    }
    if (const auto* s = std::get_if<StaticPolicy>(&m.policy))
      mj["policy"] = {{"kind", "static"}, {"a", s->a}};
    else if (const auto* br = std::get_if<MyopicBrPolicy>(&m.policy))
      mj["policy"] = {{"kind", "myopic_br"}, {"grid_points", br->grid_points}, {"replicas", br->replicas}};
    else {
      const auto& d = std::get<DeltaAdaptivePolicy>(m.policy);
      mj["policy"] = {{"kind", "delta_adaptive"}, {"step", d.step}, {"floor", d.floor}};
    }
    miners.push_back(std::move(mj));
  }
  root["miners"] = std::move(miners);
  root["demand"] = std::visit(
      [](const auto& f) -> Json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantDemand>)
          return {{"family", "constant"}, {"M", f.M}};
        else if constexpr (std::is_same_v<T, UniformDemand>)
          return {{"family", "uniform"}, {"lo", f.lo}, {"hi", f.hi}};
        else if constexpr (std::is_same_v<T, GammaDemand>)
          return {{"family", "gamma"}, {"shape", f.shape}, {"rate", f.rate}};
        else
          return {{"family", "lognormal"}, {"mu", f.mu}, {"sigma", f.sigma}};
      },
      cfg.demand);
  root["rounds"] = cfg.rounds;
  root["replicas"] = cfg.replicas;
  root["seed"] = cfg.seed;
  root["grid_points"] = cfg.grid_points;
  root["audit"] = {{"theta", cfg.audit.theta}, {"gamma", cfg.audit.gamma}};
  return root;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

/// FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace poolsim
