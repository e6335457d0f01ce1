#include "mbrkit/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "mbrkit/error.hpp"

namespace mbrkit {
namespace {

constexpr std::array<std::string_view, 5> kMetrics = {"bleu", "chrf", "ter",
                                                      "dot", "qe-dot"};
constexpr std::array<std::string_view, 6> kDecoders = {
    "mbr", "rambr", "cbmbr", "prune", "pmbr", "rerank"};
constexpr std::array<std::string_view, 17> kKeys = {
    "metric",      "decoder",     "estimator",        "nbest",
    "seed",        "k",           "kmeans_iters",     "reduction_factor",
    "rank",        "als_iters",   "als_reg",          "alpha",
    "n_bootstrap", "initial_refs", "embedding_path",  "hash_dim",
    "hash_seed"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

std::string scalar(const YAML::Node& node, const std::string& key,
                   std::string_view expected) {
  if (!node.IsScalar()) {
    throw ConfigError("key '" + key + "' expects " + std::string(expected));
  }
  return node.Scalar();
}

template <typename T>
T parse_integer(const YAML::Node& node, const std::string& key, T min) {
  const std::string expected = "an integer ≥ " + std::to_string(min);
  const std::string s = scalar(node, key, expected);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "' expects " + expected + ", got '" + s + "'");
  }
  if (value < min) {
    throw ConfigError(key + " must be ≥ " + std::to_string(min) + " (got " + s + ")");
  }
  return value;
}

double parse_real(const YAML::Node& node, const std::string& key) {
  const std::string s = scalar(node, key, "a real number");
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw ConfigError("key '" + key + "' expects a real number, got '" + s + "'");
  }
  return value;
}

template <std::size_t N>
std::string parse_choice(const YAML::Node& node, const std::string& key,
                         const std::array<std::string_view, N>& choices) {
  std::string allowed;
  for (auto c : choices) {
    if (!allowed.empty()) allowed += "|";
    allowed += c;
  }
  const std::string s = scalar(node, key, "one of {" + allowed + "}");
  if (!contains(choices, s)) {
    throw ConfigError("key '" + key + "' expects one of {" + allowed +
                      "}, got '" + s + "'");
  }
  return s;
}

void apply(Config& c, const std::string& key, const YAML::Node& v) {
  if (key == "metric") {
    c.metric = parse_choice(v, key, kMetrics);
  } else if (key == "decoder") {
    c.decoder = parse_choice(v, key, kDecoders);
  } else if (key == "estimator") {
    constexpr std::array<std::string_view, 2> kEst = {"mc", "mb"};
    c.estimator = parse_choice(v, key, kEst) == "mc" ? Estimator::kMonteCarlo
                                                     : Estimator::kModelBased;
  } else if (key == "nbest") {
    c.nbest = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(v, key, 0);
  } else if (key == "k") {
    c.k = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "kmeans_iters") {
    c.kmeans_iters = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "reduction_factor") {
    c.reduction_factor = parse_real(v, key);
    if (c.reduction_factor < 1.0) {
      throw ConfigError("reduction_factor must be ≥ 1");
    }
  } else if (key == "rank") {
    c.rank = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "als_iters") {
    c.als_iters = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "als_reg") {
    c.als_reg = parse_real(v, key);
    if (c.als_reg < 0.0) throw ConfigError("als_reg must be ≥ 0");
  } else if (key == "alpha") {
    c.alpha = parse_real(v, key);
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
      throw ConfigError("alpha must be in (0, 1)");
    }
  } else if (key == "n_bootstrap") {
    c.n_bootstrap = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "initial_refs") {
    c.initial_refs = parse_integer<std::size_t>(v, key, 1);
  } else if (key == "embedding_path") {
    c.embedding_path = scalar(v, key, "a path string");
  } else if (key == "hash_dim") {
    c.hash_dim = parse_integer<std::size_t>(v, key, 2);
  } else if (key == "hash_seed") {
    c.hash_seed = parse_integer<std::uint64_t>(v, key, 0);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

std::string_view to_string(Estimator e) {
  return e == Estimator::kMonteCarlo ? "mc" : "mb";
}

void validate(const Config& c) {
  if (!contains(kMetrics, c.metric)) {
    throw ConfigError("unknown metric '" + c.metric + "'");
  }
  if (!contains(kDecoders, c.decoder)) {
    throw ConfigError("unknown decoder '" + c.decoder + "'");
  }
  const bool has_embeddings = c.embedding_path.has_value() || c.hash_dim.has_value();
  if (c.decoder == "cbmbr") {
    if (!has_embeddings) {
      throw ConfigError(
          "decoder 'cbmbr' requires embeddings: pass --embeddings PATH or set "
          "hash_dim");
    }
    if (c.metric != "dot") {
      throw ConfigError("decoder 'cbmbr' requires metric 'dot', got '" +
                        c.metric + "'");
    }
  }
  if ((c.metric == "dot" || c.metric == "qe-dot") && !has_embeddings) {
    throw ConfigError("metric '" + c.metric +
                      "' requires embeddings: pass --embeddings PATH or set "
                      "hash_dim");
  }
  if (c.decoder == "rerank" && c.metric != "qe-dot") {
    throw ConfigError("decoder 'rerank' requires a reference-free metric "
                      "(qe-dot), got '" + c.metric + "'");
  }
  if (c.decoder != "rerank" && c.metric == "qe-dot") {
    throw ConfigError("metric 'qe-dot' is reference-free; use decoder 'rerank'");
  }
  if (c.decoder == "rambr" && c.metric != "bleu" && c.metric != "chrf" &&
      c.metric != "dot") {
    throw ConfigError("decoder 'rambr' requires an aggregatable metric "
                      "(bleu, chrf, dot), got '" + c.metric + "'");
  }
}

Config load_config_text(std::string_view yaml, const ConfigOverrides& overrides) {
  std::istringstream in{std::string(yaml)};
  return load_config(&in, overrides);
}

Config load_config(std::istream* yaml, const ConfigOverrides& overrides) {
  YAML::Node root;
  if (yaml != nullptr) {
    try {
      root = YAML::Load(*yaml);
    } catch (const YAML::Exception& e) {
      throw ConfigError(std::string("malformed YAML config: ") + e.what());
    }
  }
  if (root && !root.IsNull() && !root.IsMap()) {
    throw ConfigError("config file must be a YAML mapping");
  }
  Config c;
  std::map<std::string, YAML::Node> values;
  if (root && root.IsMap()) {
    for (const auto& kv : root) {
      values[kv.first.as<std::string>()] = kv.second;
    }
  }
  for (const auto& [key, value] : overrides) values[key] = YAML::Node(value);
  for (const auto& [key, value] : values) {
    if (!contains(kKeys, key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    apply(c, key, value);
  }
  validate(c);
  return c;
}

}  // namespace mbrkit
