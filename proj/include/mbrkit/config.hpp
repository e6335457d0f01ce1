#ifndef MBRKIT_CONFIG_HPP_
#define MBRKIT_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mbrkit {

enum class Estimator { kMonteCarlo, kModelBased };

std::string_view to_string(Estimator e);

// Typed decoding configuration. Every field corresponds to a YAML key of
// the same name; see load_config.
struct Config {
  std::string metric = "bleu";
  std::string decoder = "mbr";
  Estimator estimator = Estimator::kMonteCarlo;
  std::size_t nbest = 1;
  std::uint64_t seed = 0;

  // cbmbr
  std::size_t k = 64;
  std::size_t kmeans_iters = 100;

  // pmbr
  double reduction_factor = 8.0;
  std::size_t rank = 8;
  std::size_t als_iters = 20;
  double als_reg = 0.1;

  // prune
  double alpha = 0.99;
  std::size_t n_bootstrap = 500;
  std::size_t initial_refs = 8;

  // dot / qe-dot
  std::optional<std::string> embedding_path;
  std::optional<std::size_t> hash_dim;
  std::uint64_t hash_seed = 0;

  friend bool operator==(const Config&, const Config&) = default;
};

using ConfigOverrides = std::map<std::string, std::string, std::less<>>;

// Reads a YAML mapping (may be null for "no file"), applies `overrides`
// on top, fills defaults and validates every key. Throws ConfigError
// naming the offending key.
Config load_config(std::istream* yaml, const ConfigOverrides& overrides = {});

Config load_config_text(std::string_view yaml,
                        const ConfigOverrides& overrides = {});

// Cross-key requirements (e.g. cbmbr needs embeddings). Called by
// load_config; exposed for configs built in code.
void validate(const Config& config);

}  // namespace mbrkit

#endif  // MBRKIT_CONFIG_HPP_
