#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "colearn/dataset.hpp"
#include "colearn/errors.hpp"
#include "colearn/model.hpp"
#include "colearn/orchestrator.hpp"
#include "colearn/synthetic.hpp"

namespace colearn {

// A config-file problem that can be pinned to one key.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& key, const std::string& why)
      : std::runtime_error(key + ": " + why), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Declarative description of one experiment: run scalars, model choice,
// data source (file or generator), partition, output directory.
struct ExperimentConfig {
  RunConfig run;
  std::string model_name;
  int poly_degree = 2;

  // data section: exactly one of source_path / generator is active
  std::string source_path;  // empty when generating
  bool generate = false;
  LogisticGrowthParams gen_params{1.0, 1.0, 1.0};
  int gen_points = 0;
  double gen_noise_sd = 0.0;
  std::uint64_t gen_seed = 0;

  PartitionSpec split;
  std::string out_dir;

  ModelSpec make_model_spec() const {
    ModelSpec spec = make_model(model_name, poly_degree);
    if (box_lower && box_upper) {
      std::vector<std::pair<double, double>> box;
      for (std::size_t j = 0; j < box_lower->size(); ++j) {
        box.emplace_back((*box_lower)[j], (*box_upper)[j]);
      }
      spec.param_box = box;
    }
    return spec;
  }

  std::optional<std::vector<double>> box_lower;
  std::optional<std::vector<double>> box_upper;

  Dataset load_source() const {
    if (generate) {
      std::vector<double> times;
      for (int t = 0; t < gen_points; ++t) times.push_back(t);
      return generate_logistic(gen_params, times, gen_noise_sd, gen_seed);
    }
    return load_csv(source_path);
  }
};

namespace detail {

struct RawConfig {
  // section -> key -> (value, consumed)
  std::map<std::string, std::map<std::string, std::pair<std::string, bool>>> entries;

  std::optional<std::string> take(const std::string& section, const std::string& key) {
    auto s = entries.find(section);
    if (s == entries.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    k->second.second = true;
    return k->second.first;
  }
};

inline std::string trim(std::string_view v) {
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
  return std::string(v);
}

inline RawConfig parse_ini(const std::string& text, const std::string& origin) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError(origin + ": row " + std::to_string(row) + ": unterminated section", row);
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ": row " + std::to_string(row) + ": expected key = value", row);
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ParseError(origin + ": row " + std::to_string(row) + ": empty key", row);
    auto& slots = raw.entries[section];
    if (slots.find(key) != slots.end()) {
      throw ParseError(origin + ": row " + std::to_string(row) + ": duplicate key " + key, row);
    }
    slots[key] = {value, false};
  }
  return raw;
}

inline double to_double(const std::string& key, const std::string& value) {
  double out;
  if (!parse_double(value, out)) throw ValidationError(key, "not a number: '" + value + "'");
  return out;
}

inline long to_long(const std::string& key, const std::string& value) {
  const double d = to_double(key, value);
  const long l = static_cast<long>(d);
  if (static_cast<double>(l) != d) throw ValidationError(key, "not an integer: '" + value + "'");
  return l;
}

inline std::uint64_t to_seed(const std::string& key, const std::string& value) {
  const long l = to_long(key, value);
  if (l < 0) throw ValidationError(key, "must be nonnegative");
  return static_cast<std::uint64_t>(l);
}

inline std::vector<double> to_vector(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ValidationError(key, "empty list");
  return out;
}

inline std::vector<std::pair<long, long>> to_ranges(const std::string& key, const std::string& value) {
  std::vector<std::pair<long, long>> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const std::string r = trim(item);
    const auto colon = r.find(':');
    if (colon == std::string::npos) throw ValidationError(key, "range must be first:last, got '" + r + "'");
    out.emplace_back(to_long(key, trim(std::string_view(r).substr(0, colon))),
                     to_long(key, trim(std::string_view(r).substr(colon + 1))));
  }
  if (out.empty()) throw ValidationError(key, "empty list");
  return out;
}

}  // namespace detail

// Parses and validates a config document.  `origin` names the file for
// messages; relative data paths resolve against its parent directory.
inline ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
  detail::RawConfig raw = detail::parse_ini(text, origin);
  ExperimentConfig cfg;

  const auto require = [&](const char* section, const char* key) {
    auto v = raw.take(section, key);
    if (!v) throw ValidationError(std::string(section) + "." + key, "missing required key");
    return *v;
  };
  const auto optional = [&](const char* section, const char* key) { return raw.take(section, key); };
  const auto fullkey = [](const char* section, const char* key) {
    return std::string(section) + "." + key;
  };

  // [run]
  cfg.run.agent_count = static_cast<int>(detail::to_long(fullkey("run", "agents"), require("run", "agents")));
  if (cfg.run.agent_count < 1) throw ValidationError("run.agents", "must be >= 1");
  cfg.run.horizon = detail::to_double(fullkey("run", "horizon"), require("run", "horizon"));
  if (!(cfg.run.horizon > 0.0)) throw ValidationError("run.horizon", "must be positive");
  cfg.run.steps = detail::to_long(fullkey("run", "steps"), require("run", "steps"));
  if (cfg.run.steps < 1) throw ValidationError("run.steps", "must be >= 1");
  cfg.run.seed = detail::to_seed(fullkey("run", "seed"), require("run", "seed"));
  if (auto v = optional("run", "tol")) {
    cfg.run.tol = detail::to_double("run.tol", *v);
    if (!(cfg.run.tol > 0.0)) throw ValidationError("run.tol", "must be positive");
  }
  if (auto v = optional("run", "record_stride")) {
    cfg.run.record_stride = detail::to_long("run.record_stride", *v);
    if (cfg.run.record_stride < 1) throw ValidationError("run.record_stride", "must be >= 1");
  } else {
    cfg.run.record_stride = std::max<long>(1, cfg.run.steps / 1000);  // ~10^3 rows
  }

  // [dynamics]
  cfg.run.dynamics.delta = cfg.run.horizon / static_cast<double>(cfg.run.steps);
  if (auto v = optional("dynamics", "delta")) {
    const double given = detail::to_double("dynamics.delta", *v);
    if (std::abs(given - cfg.run.dynamics.delta) > 1e-15) {
      throw ValidationError("dynamics.delta", "inconsistent with horizon/steps");
    }
    cfg.run.dynamics.delta = given;
  }
  cfg.run.dynamics.gamma = detail::to_double(fullkey("dynamics", "gamma"), require("dynamics", "gamma"));
  if (!(cfg.run.dynamics.gamma > 0.0)) throw ValidationError("dynamics.gamma", "must be positive");
  cfg.run.dynamics.eta = detail::to_double(fullkey("dynamics", "eta"), require("dynamics", "eta"));
  if (!(cfg.run.dynamics.eta > 0.0)) throw ValidationError("dynamics.eta", "must be positive");
  cfg.run.dynamics.c = detail::to_double(fullkey("dynamics", "noise"), require("dynamics", "noise"));
  if (!(cfg.run.dynamics.c >= 0.0)) throw ValidationError("dynamics.noise", "must be nonnegative");
  if (!(cfg.run.dynamics.delta * cfg.run.dynamics.gamma < 1.0)) {
    throw ValidationError("dynamics.gamma", "requires delta*gamma < 1");
  }
  if (auto v = optional("dynamics", "clip")) {
    cfg.run.l_lip = detail::to_double("dynamics.clip", *v);
    if (!(*cfg.run.l_lip > 0.0)) throw ValidationError("dynamics.clip", "must be positive");
  }

  // [principal]
  cfg.run.principal.beta = detail::to_double(fullkey("principal", "beta"), require("principal", "beta"));
  if (!(cfg.run.principal.beta > 0.0) || !(cfg.run.principal.beta < 1.0)) {
    throw ValidationError("principal.beta", "must lie in (0,1)");
  }
  cfg.run.principal.mu = detail::to_double(fullkey("principal", "mu"), require("principal", "mu"));
  if (!(cfg.run.principal.mu > 0.0)) throw ValidationError("principal.mu", "must be positive");
  if (auto v = optional("principal", "alpha0")) {
    cfg.run.alpha0 = detail::to_vector("principal.alpha0", *v);
    for (double a : *cfg.run.alpha0) {
      if (!(a > 0.0)) throw ValidationError("principal.alpha0", "entries must be positive");
    }
  }

  // [model]
  cfg.model_name = require("model", "name");
  if (cfg.model_name != "logistic_growth" && cfg.model_name != "linear" && cfg.model_name != "polynomial") {
    throw ValidationError("model.name", "unknown model '" + cfg.model_name + "'");
  }
  if (auto v = optional("model", "degree")) {
    cfg.poly_degree = static_cast<int>(detail::to_long("model.degree", *v));
    if (cfg.poly_degree < 0) throw ValidationError("model.degree", "must be >= 0");
  }
  const auto lower = optional("model", "box_lower");
  const auto upper = optional("model", "box_upper");
  if (lower.has_value() != upper.has_value()) {
    throw ValidationError("model.box_lower", "box_lower and box_upper must appear together");
  }
  if (lower) {
    cfg.box_lower = detail::to_vector("model.box_lower", *lower);
    cfg.box_upper = detail::to_vector("model.box_upper", *upper);
    if (cfg.box_lower->size() != cfg.box_upper->size()) {
      throw ValidationError("model.box_upper", "length differs from box_lower");
    }
    for (std::size_t j = 0; j < cfg.box_lower->size(); ++j) {
      if (!((*cfg.box_lower)[j] < (*cfg.box_upper)[j])) {
        throw ValidationError("model.box_lower", "needs lower < upper per coordinate");
      }
    }
    cfg.run.use_param_box = true;
  }

  // [init]
  const int p_expected = cfg.model_name == "logistic_growth" ? 3
                         : cfg.model_name == "linear"         ? 1
                                                              : cfg.poly_degree + 1;
  bool any_per_agent = false;
  for (int k = 1; k <= cfg.run.agent_count; ++k) {
    if (auto v = optional("init", ("theta0_agent" + std::to_string(k)).c_str())) {
      if (!any_per_agent) {
        cfg.run.theta0_per_agent.assign(static_cast<std::size_t>(cfg.run.agent_count), {});
        any_per_agent = true;
      }
      cfg.run.theta0_per_agent[static_cast<std::size_t>(k - 1)] =
          detail::to_vector("init.theta0_agent" + std::to_string(k), *v);
    }
  }
  if (auto v = optional("init", "theta0")) {
    cfg.run.theta0 = detail::to_vector("init.theta0", *v);
  }
  if (any_per_agent) {
    for (int k = 0; k < cfg.run.agent_count; ++k) {
      if (cfg.run.theta0_per_agent[static_cast<std::size_t>(k)].empty()) {
        if (cfg.run.theta0.empty()) {
          throw ValidationError("init.theta0_agent" + std::to_string(k + 1),
                                "missing (no shared theta0 fallback given)");
        }
        cfg.run.theta0_per_agent[static_cast<std::size_t>(k)] = cfg.run.theta0;
      }
    }
  } else if (cfg.run.theta0.empty()) {
    throw ValidationError("init.theta0", "missing required key");
  }
  for (const auto& v : cfg.run.theta0_per_agent) {
    if (static_cast<int>(v.size()) != p_expected) {
      throw ValidationError("init.theta0_agent*", "length must match model dimension");
    }
  }
  if (!cfg.run.theta0.empty() && static_cast<int>(cfg.run.theta0.size()) != p_expected) {
    throw ValidationError("init.theta0", "length must match model dimension");
  }
  if (auto v = optional("init", "p0")) {
    cfg.run.p0 = detail::to_vector("init.p0", *v);
    if (static_cast<int>(cfg.run.p0.size()) != p_expected) {
      throw ValidationError("init.p0", "length must match model dimension");
    }
  }
  bool any_p0_per_agent = false;
  for (int k = 1; k <= cfg.run.agent_count; ++k) {
    if (auto v = optional("init", ("p0_agent" + std::to_string(k)).c_str())) {
      if (!any_p0_per_agent) {
        cfg.run.p0_per_agent.assign(static_cast<std::size_t>(cfg.run.agent_count), {});
        any_p0_per_agent = true;
      }
      cfg.run.p0_per_agent[static_cast<std::size_t>(k - 1)] =
          detail::to_vector("init.p0_agent" + std::to_string(k), *v);
    }
  }
  if (any_p0_per_agent) {
    for (int k = 0; k < cfg.run.agent_count; ++k) {
      auto& v = cfg.run.p0_per_agent[static_cast<std::size_t>(k)];
      if (v.empty()) {
        v = cfg.run.p0.empty() ? std::vector<double>(static_cast<std::size_t>(p_expected), 0.0)
                               : cfg.run.p0;
      }
      if (static_cast<int>(v.size()) != p_expected) {
        throw ValidationError("init.p0_agent" + std::to_string(k + 1),
                              "length must match model dimension");
      }
    }
  }

  // [data]
  const auto source = optional("data", "source");
  const auto generate = optional("data", "generate");
  if (source.has_value() == generate.has_value()) {
    throw ValidationError("data.source", "exactly one of data.source / data.generate is required");
  }
  if (source) {
    std::filesystem::path path(*source);
    if (path.is_relative()) {
      path = std::filesystem::path(origin).parent_path() / path;
    }
    cfg.source_path = path.string();
  } else {
    if (*generate != "logistic") throw ValidationError("data.generate", "only 'logistic' is supported");
    cfg.generate = true;
    cfg.gen_params.initial_population = detail::to_double(fullkey("data", "gen_n0"), require("data", "gen_n0"));
    cfg.gen_params.equilibrium_population = detail::to_double(fullkey("data", "gen_ne"), require("data", "gen_ne"));
    cfg.gen_params.growth_rate = detail::to_double(fullkey("data", "gen_r"), require("data", "gen_r"));
    try {
      cfg.gen_params.validate();
    } catch (const std::invalid_argument& e) {
      throw ValidationError("data.gen_n0", e.what());
    }
    cfg.gen_points = static_cast<int>(detail::to_long(fullkey("data", "gen_points"), require("data", "gen_points")));
    if (cfg.gen_points < 1) throw ValidationError("data.gen_points", "must be >= 1");
    cfg.gen_noise_sd = detail::to_double(fullkey("data", "gen_noise_sd"), require("data", "gen_noise_sd"));
    if (cfg.gen_noise_sd < 0.0) throw ValidationError("data.gen_noise_sd", "must be nonnegative");
    cfg.gen_seed = detail::to_seed(fullkey("data", "gen_seed"), require("data", "gen_seed"));
  }

  const std::string mode = require("data", "partition");
  if (mode == "by-range") {
    cfg.split.mode = PartitionMode::kByRange;
    cfg.split.ranges = detail::to_ranges(fullkey("data", "ranges"), require("data", "ranges"));
  } else if (mode == "bootstrap" || mode == "bootstrap-no-replace") {
    cfg.split.mode = mode == "bootstrap" ? PartitionMode::kBootstrapWithReplacement
                                         : PartitionMode::kBootstrapWithoutReplacement;
    const auto sizes = detail::to_vector(fullkey("data", "sizes"), require("data", "sizes"));
    for (double s : sizes) {
      if (s < 1.0 || s != std::floor(s)) throw ValidationError("data.sizes", "entries must be positive integers");
      cfg.split.sizes.push_back(static_cast<std::size_t>(s));
    }
    if (auto v = optional("data", "partition_seed")) {
      cfg.split.seed = detail::to_seed("data.partition_seed", *v);
    }
  } else {
    throw ValidationError("data.partition", "expected by-range, bootstrap or bootstrap-no-replace");
  }
  if (static_cast<int>(cfg.split.recipients()) != cfg.run.agent_count + 1) {
    throw ValidationError("data.partition", "needs agents + 1 recipients (test set last)");
  }

  // [output]
  if (auto v = optional("output", "dir")) cfg.out_dir = *v;

  // reject anything unconsumed: catches typos early
  for (const auto& [section, keys] : raw.entries) {
    for (const auto& [key, entry] : keys) {
      if (!entry.second) {
        throw ValidationError(section + "." + key, "unknown key");
      }
    }
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_vector(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace detail

// Canonical re-serialization: parsing the output reproduces the same
// experiment (used for the config echo in summary.json).
inline std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[run]\n";
  out << "agents = " << cfg.run.agent_count << "\n";
  out << "horizon = " << detail::format_double(cfg.run.horizon) << "\n";
  out << "steps = " << cfg.run.steps << "\n";
  out << "seed = " << cfg.run.seed << "\n";
  out << "tol = " << detail::format_double(cfg.run.tol) << "\n";
  out << "record_stride = " << cfg.run.record_stride << "\n";
  out << "\n[dynamics]\n";
  out << "gamma = " << detail::format_double(cfg.run.dynamics.gamma) << "\n";
  out << "eta = " << detail::format_double(cfg.run.dynamics.eta) << "\n";
  out << "noise = " << detail::format_double(cfg.run.dynamics.c) << "\n";
  if (cfg.run.l_lip) out << "clip = " << detail::format_double(*cfg.run.l_lip) << "\n";
  out << "\n[principal]\n";
  out << "beta = " << detail::format_double(cfg.run.principal.beta) << "\n";
  out << "mu = " << detail::format_double(cfg.run.principal.mu) << "\n";
  if (cfg.run.alpha0) out << "alpha0 = " << detail::format_vector(*cfg.run.alpha0) << "\n";
  out << "\n[model]\n";
  out << "name = " << cfg.model_name << "\n";
  if (cfg.model_name == "polynomial") out << "degree = " << cfg.poly_degree << "\n";
  if (cfg.box_lower) {
    out << "box_lower = " << detail::format_vector(*cfg.box_lower) << "\n";
    out << "box_upper = " << detail::format_vector(*cfg.box_upper) << "\n";
  }
  out << "\n[init]\n";
  if (!cfg.run.theta0_per_agent.empty()) {
    for (std::size_t k = 0; k < cfg.run.theta0_per_agent.size(); ++k) {
      out << "theta0_agent" << (k + 1) << " = "
          << detail::format_vector(cfg.run.theta0_per_agent[k]) << "\n";
    }
  } else {
    out << "theta0 = " << detail::format_vector(cfg.run.theta0) << "\n";
  }
  if (!cfg.run.p0_per_agent.empty()) {
    for (std::size_t k = 0; k < cfg.run.p0_per_agent.size(); ++k) {
      out << "p0_agent" << (k + 1) << " = " << detail::format_vector(cfg.run.p0_per_agent[k])
          << "\n";
    }
  } else if (!cfg.run.p0.empty()) {
    out << "p0 = " << detail::format_vector(cfg.run.p0) << "\n";
  }
  out << "\n[data]\n";
  if (cfg.generate) {
    out << "generate = logistic\n";
    out << "gen_n0 = " << detail::format_double(cfg.gen_params.initial_population) << "\n";
    out << "gen_ne = " << detail::format_double(cfg.gen_params.equilibrium_population) << "\n";
    out << "gen_r = " << detail::format_double(cfg.gen_params.growth_rate) << "\n";
    out << "gen_points = " << cfg.gen_points << "\n";
    out << "gen_noise_sd = " << detail::format_double(cfg.gen_noise_sd) << "\n";
    out << "gen_seed = " << cfg.gen_seed << "\n";
  } else {
    out << "source = " << cfg.source_path << "\n";
  }
  if (cfg.split.mode == PartitionMode::kByRange) {
    out << "partition = by-range\n";
    out << "ranges = ";
    for (std::size_t i = 0; i < cfg.split.ranges.size(); ++i) {
      if (i) out << ", ";
      out << cfg.split.ranges[i].first << ":" << cfg.split.ranges[i].second;
    }
    out << "\n";
  } else {
    out << "partition = "
        << (cfg.split.mode == PartitionMode::kBootstrapWithReplacement ? "bootstrap"
                                                                       : "bootstrap-no-replace")
        << "\n";
    out << "sizes = ";
    for (std::size_t i = 0; i < cfg.split.sizes.size(); ++i) {
      if (i) out << ", ";
      out << cfg.split.sizes[i];
    }
    out << "\n";
    out << "partition_seed = " << cfg.split.seed << "\n";
  }
  if (!cfg.out_dir.empty()) {
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
  }
  return out.str();
}

}  // namespace colearn
