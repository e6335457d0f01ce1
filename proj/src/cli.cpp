#include "mbrkit/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbrkit/config.hpp"
#include "mbrkit/corpus.hpp"
#include "mbrkit/decoders.hpp"
#include "mbrkit/error.hpp"
#include "mbrkit/metrics.hpp"
#include "mbrkit/profiler.hpp"
#include "mbrkit/selftest.hpp"

namespace mbrkit {
namespace {

struct DecodeFlags {
  std::string input;
  std::string source;
  std::string format = "jsonl";
  std::size_t num_candidates = 0;
  std::string config_path;
  std::string output;
  std::string output_format = "text";
  std::string report = "json";
  std::string report_file;
  int threads = 0;
  std::vector<std::string> sets;
};

// CLI11 parses a reversed argument vector.
int parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
          std::ostream& err, bool* done) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    *done = true;
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    *done = true;
    return kExitUsageError;
  }
  *done = false;
  return kExitOk;
}

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  return f;
}

// Lists texts of `instance` that the embedding provider cannot resolve.
void check_embeddings(const std::vector<Instance>& instances,
                      const EmbeddingProvider& provider, bool needs_source) {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    std::vector<std::string> missing;
    auto check = [&](const std::string& t) {
      if (!provider.has(t) &&
          std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    };
    for (const auto& h : inst.hypotheses) check(h);
    if (needs_source) {
      if (inst.source) check(*inst.source);
    } else {
      for (const auto& r : inst.references.support()) check(r);
    }
    if (missing.empty()) continue;
    std::string msg = "instance " + std::to_string(i);
    if (inst.id) msg += " (id=" + *inst.id + ")";
    msg += ": missing embeddings for";
    for (const auto& m : missing) msg += " '" + m + "'";
    throw DataError(msg);
  }
}

int decode_impl(const std::vector<std::string>& args, std::istream& in,
                std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Minimum Bayes risk decoding over candidate lists", "mbrkit decode"};
  DecodeFlags f;
  std::string metric, decoder, estimator, embeddings;
  std::size_t nbest = 0;
  std::uint64_t seed = 0;
  app.add_option("--input", f.input, "Input file (default: stdin)");
  app.add_option("--source", f.source, "Source sentences, one per instance (plain format)");
  app.add_option("--format", f.format, "Input format")
      ->check(CLI::IsMember({"jsonl", "plain"}));
  app.add_option("--num-candidates", f.num_candidates,
                 "Hypotheses per instance (plain format)");
  auto* o_metric = app.add_option("--metric", metric, "bleu|chrf|ter|dot|qe-dot");
  auto* o_decoder =
      app.add_option("--decoder", decoder, "mbr|rambr|cbmbr|prune|pmbr|rerank");
  auto* o_estimator = app.add_option("--estimator", estimator, "mc|mb");
  auto* o_nbest = app.add_option("--nbest", nbest, "Outputs per instance");
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  app.add_option("--config_path", f.config_path, "YAML configuration file");
  auto* o_embed = app.add_option("--embeddings", embeddings, "Embedding JSONL file");
  app.add_option("--set", f.sets, "Override any config key: KEY=VALUE");
  app.add_option("--output", f.output, "Output file (default: stdout)");
  app.add_option("--output-format", f.output_format, "Output format")
      ->check(CLI::IsMember({"text", "jsonl"}));
  app.add_option("--report", f.report, "Run summary and profile")
      ->check(CLI::IsMember({"json", "table", "off"}));
  app.add_option("--report-file", f.report_file, "Write the report here instead of stderr");
  app.add_option("--threads", f.threads, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  bool done = false;
  const int status = parse(app, args, out, err, &done);
  if (done) return status;

  ConfigOverrides overrides;
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    }
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (*o_metric) overrides["metric"] = metric;
  if (*o_decoder) overrides["decoder"] = decoder;
  if (*o_estimator) overrides["estimator"] = estimator;
  if (*o_nbest) overrides["nbest"] = std::to_string(nbest);
  if (*o_seed) overrides["seed"] = std::to_string(seed);
  if (*o_embed) overrides["embedding_path"] = embeddings;

  Config config;
  if (!f.config_path.empty()) {
    auto file = open_input(f.config_path, "config file");
    config = load_config(&file, overrides);
  } else {
    config = load_config(nullptr, overrides);
  }
  if (f.format == "plain" && f.num_candidates == 0) {
    throw ConfigError("--format plain requires --num-candidates N");
  }

  omp_set_num_threads(f.threads > 0 ? f.threads : omp_get_num_procs());
  Profiler& profiler = Profiler::global();
  profiler.reset();
  profiler.set_enabled(f.report != "off");
  struct Reenable {
    Profiler& p;
    ~Reenable() { p.set_enabled(true); }
  } reenable{profiler};

  MetricOptions options;
  if (config.embedding_path) {
    auto file = open_input(*config.embedding_path, "embeddings");
    std::vector<std::string> warnings;
    options.embeddings =
        std::make_shared<EmbeddingTable>(load_embeddings(file, &warnings));
    for (const auto& w : warnings) err << "warning: " << w << "\n";
  }
  if (config.hash_dim) {
    options.hash = EmbeddingProvider::HashOptions{*config.hash_dim, config.hash_seed};
  }
  const auto metric_impl = make_metric(config.metric, options);

  std::vector<Instance> instances;
  std::ifstream input_file;
  std::istream* input = &in;
  if (!f.input.empty()) {
    input_file = open_input(f.input, "input");
    input = &input_file;
  }
  if (f.format == "jsonl") {
    instances = parse_jsonl(*input);
  } else if (!f.source.empty()) {
    auto src = open_input(f.source, "source file");
    instances = parse_plain(*input, f.num_candidates, &src);
  } else {
    instances = parse_plain(*input, f.num_candidates);
  }

  if (const auto* dot = dynamic_cast<const DotMetric*>(metric_impl.get())) {
    check_embeddings(instances, dot->embeddings(), false);
  } else if (config.metric == "qe-dot") {
    check_embeddings(instances,
                     EmbeddingProvider(options.embeddings, options.hash), true);
  }

  const auto outputs = decode_batch(*metric_impl, instances, config);
  const OutputMode mode =
      f.output_format == "jsonl" ? OutputMode::kJsonl : OutputMode::kText;
  if (f.output.empty()) {
    write_outputs(out, outputs, mode);
    out.flush();
  } else {
    std::ofstream file(f.output);
    if (!file) throw ConfigError("cannot open output '" + f.output + "'");
    write_outputs(file, outputs, mode);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const auto nsent = std::max<std::uint64_t>(instances.size(), 1);
  nlohmann::ordered_json summary;
  summary["instances"] = instances.size();
  summary["decoder"] = config.decoder;
  summary["metric"] = config.metric;
  summary["estimator"] = std::string(to_string(config.estimator));
  summary["seed"] = config.seed;
  summary["wall_time"] = wall;
  std::ostringstream report;
  if (f.report == "json") {
    summary["profile"] = to_json(profiler.aggregate_and_report(nsent));
    report << summary.dump() << "\n";
  } else if (f.report == "table") {
    for (const auto& [k, v] : summary.items()) report << k << ": " << v.dump() << "\n";
    report << format_table(profiler.aggregate_and_report(nsent));
  } else {
    report << summary.dump() << "\n";
  }
  if (f.report_file.empty()) {
    err << report.str();
  } else {
    std::ofstream file(f.report_file);
    if (!file) throw ConfigError("cannot open report file '" + f.report_file + "'");
    file << report.str();
  }
  return kExitOk;
}

}  // namespace

int run_decode(const std::vector<std::string>& args, std::istream& in,
               std::ostream& out, std::ostream& err) {
  try {
    return decode_impl(args, in, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

int run_selftest(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Built-in oracle checks on synthetic data", "mbrkit selftest"};
  std::vector<std::string> only;
  std::uint64_t seed = 0;
  app.add_option("--only", only, "Run only the named property (repeatable)");
  app.add_option("--seed", seed, "Seed for the synthetic data");
  bool done = false;
  const int status = parse(app, args, out, err, &done);
  if (done) return status;

  const auto& props = selftest_properties();
  for (const auto& name : only) {
    const bool known = std::any_of(props.begin(), props.end(),
                                   [&](const auto& p) { return p.name == name; });
    if (!known) {
      err << "error: unknown property '" << name << "'; available:";
      for (const auto& p : props) err << " " << p.name;
      err << "\n";
      return kExitUsageError;
    }
  }
  bool all_passed = true;
  for (const auto& p : props) {
    if (!only.empty() && std::find(only.begin(), only.end(), p.name) == only.end()) {
      continue;
    }
    const SelfTestResult r = p.run(seed);
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kExitOk : kExitDataError;
}

int run_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const char* usage =
      "usage: mbrkit [decode] [options]   decode candidate lists\n"
      "       mbrkit selftest [--only NAME]  run built-in oracle checks\n"
      "Run 'mbrkit decode --help' for decoding options.\n";
  if (!args.empty() && (args[0] == "help" || args[0] == "--help" || args[0] == "-h")) {
    std::cout << usage;
    return kExitOk;
  }
  if (!args.empty() && args[0] == "selftest") {
    args.erase(args.begin());
    return run_selftest(args, std::cout, std::cerr);
  }
  if (!args.empty() && args[0] == "decode") {
    args.erase(args.begin());
  } else if (!args.empty() && args[0].rfind("-", 0) != 0) {
    std::cerr << "error: unknown subcommand '" << args[0] << "'\n" << usage;
    return kExitUsageError;
  }
  return run_decode(args, std::cin, std::cout, std::cerr);
}

}  // namespace mbrkit
