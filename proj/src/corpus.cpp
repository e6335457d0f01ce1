#include "mbrkit/corpus.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mbrkit/error.hpp"

namespace mbrkit {
namespace {

using nlohmann::json;

std::string describe(std::size_t line, const std::optional<std::string>& id) {
  std::string s = "instance at line " + std::to_string(line);
  if (id) s += " (id=" + *id + ")";
  return s;
}

std::vector<std::string> string_array(const json& value, const char* key,
                                      std::size_t line) {
  if (!value.is_array()) {
    throw DataError("line " + std::to_string(line) + ": '" + key +
                    "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw DataError("line " + std::to_string(line) + ": '" + key +
                      "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

ReferenceBag::ReferenceBag(std::vector<std::string> items)
    : items_(std::move(items)) {
  std::unordered_map<std::string_view, std::size_t> index;
  item_to_support_.reserve(items_.size());
  for (const auto& item : items_) {
    auto [it, inserted] = index.emplace(item, support_.size());
    if (inserted) {
      support_.push_back(item);
      multiplicity_.push_back(0);
    }
    ++multiplicity_[it->second];
    item_to_support_.push_back(it->second);
  }
}

int ReferenceBag::multiplicity_of(std::string_view text) const {
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (support_[k] == text) return multiplicity_[k];
  }
  return 0;
}

bool EmbeddingTable::insert(std::string text, std::vector<double> vector) {
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_ || dim_ == 0) {
    throw DataError("embedding for '" + text + "' has dimension " +
                    std::to_string(vector.size()) + ", expected " +
                    std::to_string(dim_));
  }
  double norm2 = 0.0;
  for (double v : vector) {
    if (!std::isfinite(v)) {
      throw DataError("embedding for '" + text + "' has a non-finite entry");
    }
    norm2 += v * v;
  }
  if (norm2 == 0.0) throw DataError("cannot normalize zero vector ('" + text + "')");
  const double norm = std::sqrt(norm2);
  for (double& v : vector) v /= norm;
  auto [it, inserted] = vectors_.insert_or_assign(std::move(text), std::move(vector));
  (void)it;
  return inserted;
}

const std::vector<double>* EmbeddingTable::find(std::string_view text) const {
  auto it = vectors_.find(text);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<Instance> parse_jsonl(std::istream& in) {
  std::vector<Instance> instances;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " +
                      e.what());
    }
    if (!obj.is_object()) {
      throw DataError("line " + std::to_string(lineno) +
                      ": expected a JSON object");
    }
    Instance inst;
    if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
      inst.id = it->is_string() ? it->get<std::string>() : it->dump();
    }
    if (auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw DataError("line " + std::to_string(lineno) +
                        ": 'source' must be a string");
      }
      inst.source = it->get<std::string>();
    }
    auto hyps = obj.find("hypotheses");
    if (hyps == obj.end()) {
      throw DataError(describe(lineno, inst.id) + ": missing 'hypotheses'");
    }
    inst.hypotheses = string_array(*hyps, "hypotheses", lineno);
    if (inst.hypotheses.empty()) {
      throw DataError(describe(lineno, inst.id) + ": 'hypotheses' is empty");
    }
    if (auto it = obj.find("references"); it != obj.end() && !it->is_null()) {
      auto refs = string_array(*it, "references", lineno);
      if (refs.empty()) {
        throw DataError(describe(lineno, inst.id) + ": 'references' is empty");
      }
      inst.references = ReferenceBag(std::move(refs));
    } else {
      inst.references = ReferenceBag(inst.hypotheses);
    }
    if (auto it = obj.find("lprobs"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) {
        throw DataError(describe(lineno, inst.id) + ": 'lprobs' must be an array");
      }
      std::vector<double> lprobs;
      for (const auto& v : *it) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          throw DataError(describe(lineno, inst.id) +
                          ": 'lprobs' entries must be finite numbers");
        }
        lprobs.push_back(v.get<double>());
      }
      if (lprobs.size() != inst.references.size()) {
        throw DataError(describe(lineno, inst.id) + ": lprobs length " +
                        std::to_string(lprobs.size()) + " ≠ bag length " +
                        std::to_string(inst.references.size()));
      }
      inst.lprobs = std::move(lprobs);
    }
    instances.push_back(std::move(inst));
  }
  return instances;
}

std::vector<Instance> parse_plain(std::istream& hypotheses,
                                  std::size_t num_candidates,
                                  std::istream* sources) {
  if (num_candidates == 0) throw ConfigError("--num-candidates must be >= 1");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(hypotheses, line)) lines.push_back(line);
  if (lines.size() % num_candidates != 0) {
    throw DataError(std::to_string(lines.size()) + " not divisible by " +
                    std::to_string(num_candidates) + ": hypothesis line count " +
                    "must be a multiple of --num-candidates");
  }
  const std::size_t n = lines.size() / num_candidates;
  std::vector<std::string> source_lines;
  if (sources != nullptr) {
    while (std::getline(*sources, line)) source_lines.push_back(line);
    if (source_lines.size() != n) {
      throw DataError("source has " + std::to_string(source_lines.size()) +
                      " lines but hypotheses form " + std::to_string(n) +
                      " instances");
    }
  }
  std::vector<Instance> instances(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto first = lines.begin() + static_cast<std::ptrdiff_t>(i * num_candidates);
    instances[i].hypotheses.assign(
        std::make_move_iterator(first),
        std::make_move_iterator(first + static_cast<std::ptrdiff_t>(num_candidates)));
    instances[i].references = ReferenceBag(instances[i].hypotheses);
    if (sources != nullptr) instances[i].source = std::move(source_lines[i]);
  }
  return instances;
}

EmbeddingTable load_embeddings(std::istream& in,
                               std::vector<std::string>* warnings) {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("embeddings line " + std::to_string(lineno) +
                      ": malformed JSON: " + e.what());
    }
    auto text = obj.find("text");
    auto vec = obj.find("vector");
    if (!obj.is_object() || text == obj.end() || !text->is_string() ||
        vec == obj.end() || !vec->is_array()) {
      throw DataError("embeddings line " + std::to_string(lineno) +
                      ": expected {\"text\": string, \"vector\": array}");
    }
    std::vector<double> values;
    values.reserve(vec->size());
    for (const auto& v : *vec) {
      if (!v.is_number()) {
        throw DataError("embeddings line " + std::to_string(lineno) +
                        ": vector entries must be numbers");
      }
      values.push_back(v.get<double>());
    }
    std::string key = text->get<std::string>();
    try {
      if (!table.insert(key, std::move(values)) && warnings != nullptr) {
        warnings->push_back("embeddings line " + std::to_string(lineno) +
                            ": duplicate text '" + key +
                            "', keeping the last vector");
      }
    } catch (const DataError& e) {
      throw DataError("embeddings line " + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
  return table;
}

void write_outputs(std::ostream& out, const std::vector<DecoderOutput>& outputs,
                   OutputMode mode) {
  for (const auto& o : outputs) {
    if (mode == OutputMode::kText) {
      out << (o.sentence.empty() ? std::string() : o.sentence.front()) << '\n';
      continue;
    }
    nlohmann::ordered_json row;
    row["idx"] = o.idx;
    row["sentence"] = o.sentence;
    row["score"] = o.score;
    out << row.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace)
        << '\n';
  }
}

std::string to_jsonl(const Instance& instance) {
  nlohmann::ordered_json row;
  if (instance.id) row["id"] = *instance.id;
  if (instance.source) row["source"] = *instance.source;
  row["hypotheses"] = instance.hypotheses;
  row["references"] = instance.references.items();
  if (instance.lprobs) row["lprobs"] = *instance.lprobs;
  return row.dump(-1, ' ', false,
                  nlohmann::ordered_json::error_handler_t::replace);
}

}  // namespace mbrkit
