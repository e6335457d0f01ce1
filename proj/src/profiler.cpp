#include "mbrkit/profiler.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace mbrkit {
namespace {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};

std::atomic<std::uint64_t> next_profiler_id{1};

}  // namespace

struct Profiler::Shard {
  struct Accum {
    std::int64_t nanos = 0;
    std::uint64_t calls = 0;
  };
  std::mutex mutex;
  std::unordered_map<std::string, Accum, StringHash, std::equal_to<>> table;
};

Profiler::Scope::Scope(Profiler* owner, std::string_view name)
    : owner_(owner), name_(name), start_(std::chrono::steady_clock::now()) {}

Profiler::Scope::Scope(Scope&& other) noexcept
    : owner_(std::exchange(other.owner_, nullptr)),
      name_(other.name_),
      start_(other.start_) {}

Profiler::Scope::~Scope() {
  if (owner_ == nullptr) return;
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  owner_->add(name_,
              std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed));
}

Profiler::Profiler() : id_(next_profiler_id.fetch_add(1)) {}

Profiler::~Profiler() = default;

Profiler& Profiler::global() {
  static Profiler instance;
  return instance;
}

Profiler::Scope Profiler::measure(std::string_view name) {
  if (!enabled()) return Scope();
  return Scope(this, name);
}

Profiler::Shard& Profiler::local_shard() {
  // Per-thread cache keyed by profiler id; ids are never reused, so a
  // stale entry for a destroyed profiler is never matched again.
  thread_local std::vector<std::pair<std::uint64_t, Shard*>> cache;
  for (const auto& [id, shard] : cache) {
    if (id == id_) return *shard;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  shards_.push_back(std::make_unique<Shard>());
  Shard* shard = shards_.back().get();
  cache.emplace_back(id_, shard);
  return *shard;
}

void Profiler::register_name(std::string_view name) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (std::find(order_.begin(), order_.end(), name) == order_.end()) {
    order_.emplace_back(name);
  }
}

void Profiler::add(std::string_view name, std::chrono::nanoseconds elapsed,
                   std::uint64_t calls) {
  Shard& shard = local_shard();
  bool is_new = false;
  {
    std::lock_guard<std::mutex> lock(shard.mutex);
    auto it = shard.table.find(name);
    if (it == shard.table.end()) {
      it = shard.table.emplace(std::string(name), Shard::Accum{}).first;
      is_new = true;
    }
    it->second.nanos += std::max<std::int64_t>(elapsed.count(), 0);
    it->second.calls += calls;
  }
  if (is_new) register_name(name);
}

std::vector<ProfileRecord> Profiler::aggregate_and_report(
    std::uint64_t nsentences) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<ProfileRecord> records;
  records.reserve(order_.size());
  const double sentences = static_cast<double>(std::max<std::uint64_t>(nsentences, 1));
  for (const auto& name : order_) {
    std::int64_t nanos = 0;
    std::uint64_t calls = 0;
    for (const auto& shard : shards_) {
      std::lock_guard<std::mutex> shard_lock(shard->mutex);
      auto it = shard->table.find(name);
      if (it == shard->table.end()) continue;
      nanos += it->second.nanos;
      calls += it->second.calls;
    }
    ProfileRecord r;
    r.name = name;
    r.acctime = static_cast<double>(nanos) * 1e-9;
    r.acccalls = calls;
    r.ms_per_call =
        calls > 0 ? 1000.0 * r.acctime / static_cast<double>(calls) : 0.0;
    r.ms_per_sentence = 1000.0 * r.acctime / sentences;
    r.calls_per_sentence = static_cast<double>(calls) / sentences;
    records.push_back(std::move(r));
  }
  return records;
}

std::uint64_t Profiler::calls(std::string_view name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::uint64_t total = 0;
  for (const auto& shard : shards_) {
    std::lock_guard<std::mutex> shard_lock(shard->mutex);
    auto it = shard->table.find(name);
    if (it != shard->table.end()) total += it->second.calls;
  }
  return total;
}

void Profiler::reset() {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& shard : shards_) {
    std::lock_guard<std::mutex> shard_lock(shard->mutex);
    shard->table.clear();
  }
  order_.clear();
}

Profiler::Scope measure(std::string_view name) {
  return Profiler::global().measure(name);
}

nlohmann::ordered_json to_json(const std::vector<ProfileRecord>& records) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["name"] = r.name;
    row["acctime"] = r.acctime;
    row["acccalls"] = r.acccalls;
    row["ms/call"] = r.ms_per_call;
    row["ms/sentence"] = r.ms_per_sentence;
    row["calls/sentence"] = r.calls_per_sentence;
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_table(const std::vector<ProfileRecord>& records) {
  std::size_t width = 4;
  for (const auto& r : records) width = std::max(width, r.name.size());
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %12s %12s %12s %14s %15s\n",
                static_cast<int>(width), "name", "acctime", "acccalls",
                "ms/call", "ms/sentence", "calls/sentence");
  os << buf;
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%-*s %12.6f %12llu %12.6f %14.6f %15.3f\n",
                  static_cast<int>(width), r.name.c_str(), r.acctime,
                  static_cast<unsigned long long>(r.acccalls), r.ms_per_call,
                  r.ms_per_sentence, r.calls_per_sentence);
    os << buf;
  }
  return os.str();
}

}  // namespace mbrkit
