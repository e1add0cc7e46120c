#ifndef DNNBOUNDS_CONFIG_HPP
#define DNNBOUNDS_CONFIG_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnnbounds/activations.hpp"
#include "dnnbounds/network.hpp"
#include "dnnbounds/verify.hpp"

namespace dnnbounds {

/// Parse or validation failure in a run config. `field` is empty for syntax
/// errors, where `line` is set instead.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

/// Contents of a run config file:
///
///   {
///     "widths": [8, 8, 8, 8, 8],      // L_0..L_{k+1}, L_0 includes the bias slot
///     "activation": "tanh",           // tanh | logistic | swish
///     "theta_bar": 2.0,
///     "input_norms": [0, 1, 10],
///     "samples": 1000,
///     "seed": 42,
///     "checks": ["layers", "jacobian", "hessian", "remainder"],
///     "output": "out"                 // optional, default "."
///   }
struct RunConfig {
  std::vector<std::size_t> widths;
  ActivationKind activation = ActivationKind::Tanh;
  double theta_bar = 1.0;
  std::vector<double> input_norms;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::string output = ".";

  NetworkSpec spec() const { return NetworkSpec(widths, activation); }

  CampaignConfig campaign() const {
    return CampaignConfig{spec(), theta_bar, input_norms, samples, seed, checks, 1.0};
  }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"widths",  "activation", "theta_bar",
                                                "input_norms", "samples", "seed",
                                                "checks",  "output"};
  return keys;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& msg) {
  throw ConfigError(field, 0, "config field '" + field + "': " + msg);
}

template <typename T>
T get_field(const nlohmann::json& doc, const std::string& key, const char* expected) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    field_error(key, std::string("expected ") + expected);
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t line = detail::line_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("", line, "config syntax error at line " + std::to_string(line) + ": " +
                                    e.what());
  }
  if (!doc.is_object()) throw ConfigError("", 1, "config: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    const auto& keys = detail::config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      detail::field_error(key, "unknown key");
    }
  }
  for (const char* required : {"widths", "activation", "theta_bar", "input_norms", "samples",
                               "seed", "checks"}) {
    if (!doc.contains(required)) detail::field_error(required, "missing");
  }

  RunConfig cfg;
  const auto& widths = doc.at("widths");
  if (!widths.is_array()) detail::field_error("widths", "expected an array of positive integers");
  for (const auto& w : widths) {
    if (!w.is_number_integer() || w.get<long long>() < 1) {
      detail::field_error("widths", "expected an array of positive integers");
    }
    cfg.widths.push_back(w.get<std::size_t>());
  }

  const auto act = detail::get_field<std::string>(doc, "activation", "a string");
  const auto kind = parse_activation(act);
  if (!kind) detail::field_error("activation", "unknown activation '" + act + "'");
  cfg.activation = *kind;

  if (!doc.at("theta_bar").is_number()) detail::field_error("theta_bar", "expected a number");
  cfg.theta_bar = doc.at("theta_bar").get<double>();

  const auto& norms = doc.at("input_norms");
  if (!norms.is_array() || norms.empty()) {
    detail::field_error("input_norms", "expected a non-empty array of numbers");
  }
  for (const auto& x : norms) {
    if (!x.is_number()) detail::field_error("input_norms", "expected numbers");
    cfg.input_norms.push_back(x.get<double>());
  }

  const auto& samples = doc.at("samples");
  if (!samples.is_number_integer() || samples.get<long long>() < 1) {
    detail::field_error("samples", "expected an integer >= 1");
  }
  cfg.samples = samples.get<std::size_t>();

  const auto& seed = doc.at("seed");
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                    seed.get<long long>() < 0)) {
    detail::field_error("seed", "expected a non-negative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  const auto& checks = doc.at("checks");
  if (!checks.is_array()) detail::field_error("checks", "expected an array of check names");
  for (const auto& c : checks) {
    if (!c.is_string()) detail::field_error("checks", "expected check names");
    const auto parsed = parse_check(c.get<std::string>());
    if (!parsed) detail::field_error("checks", "unknown check '" + c.get<std::string>() + "'");
    if (std::find(cfg.checks.begin(), cfg.checks.end(), *parsed) == cfg.checks.end()) {
      cfg.checks.push_back(*parsed);
    }
  }

  if (doc.contains("output")) {
    cfg.output = detail::get_field<std::string>(doc, "output", "a string");
  }

  // Architecture and campaign constraints are enforced now, not at run time.
  try {
    (void)cfg.spec();
  } catch (const std::invalid_argument& e) {
    detail::field_error("widths", e.what());
  }
  try {
    cfg.campaign().validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    detail::field_error(msg.find("theta_bar") != std::string::npos ? "theta_bar" : "input_norms",
                        msg);
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["widths"] = cfg.widths;
  j["activation"] = std::string(to_string(cfg.activation));
  j["theta_bar"] = cfg.theta_bar;
  j["input_norms"] = cfg.input_norms;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  auto checks = nlohmann::ordered_json::array();
  for (Check c : cfg.checks) checks.push_back(std::string(to_string(c)));
  j["checks"] = checks;
  j["output"] = cfg.output;
  return j;
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_CONFIG_HPP
