#ifndef MBRKIT_PROFILER_HPP_
#define MBRKIT_PROFILER_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mbrkit {

// One aggregated row of the profiler report. acctime is in seconds, the
// per-call and per-sentence times are in milliseconds.
struct ProfileRecord {
  std::string name;
  double acctime = 0.0;
  std::uint64_t acccalls = 0;
  double ms_per_call = 0.0;
  double ms_per_sentence = 0.0;
  double calls_per_sentence = 0.0;
};

// Named code-block timer with per-thread accumulators.
//
// measure() may be entered concurrently from any number of threads. Each
// thread writes to its own shard; shards are merged by
// aggregate_and_report(), which must be called from a single control
// context. Report rows follow the order in which names were first seen.
class Profiler {
 public:
  class Scope {
   public:
    Scope() = default;
    Scope(Scope&& other) noexcept;
    Scope& operator=(Scope&&) = delete;
    Scope(const Scope&) = delete;
    ~Scope();

   private:
    friend class Profiler;
    Scope(Profiler* owner, std::string_view name);

    Profiler* owner_ = nullptr;
    std::string_view name_;
    std::chrono::steady_clock::time_point start_;
  };

  Profiler();
  ~Profiler();
  Profiler(const Profiler&) = delete;
  Profiler& operator=(const Profiler&) = delete;

  // Process-wide instance used by the free measure() function.
  static Profiler& global();

  // `name` must outlive the returned scope.
  [[nodiscard]] Scope measure(std::string_view name);

  void add(std::string_view name, std::chrono::nanoseconds elapsed,
           std::uint64_t calls = 1);

  std::vector<ProfileRecord> aggregate_and_report(
      std::uint64_t nsentences) const;

  // Completed-scope count for `name` across all threads (0 if unseen).
  std::uint64_t calls(std::string_view name) const;

  void reset();

  void set_enabled(bool enabled) { enabled_.store(enabled); }
  bool enabled() const { return enabled_.load(); }

 private:
  struct Shard;
  Shard& local_shard();
  void register_name(std::string_view name);

  const std::uint64_t id_;
  std::atomic<bool> enabled_{true};
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<Shard>> shards_;
  std::vector<std::string> order_;
};

// Shorthand for Profiler::global().measure(name).
[[nodiscard]] Profiler::Scope measure(std::string_view name);

// JSON array of objects with keys name, acctime, acccalls, ms/call,
// ms/sentence, calls/sentence.
nlohmann::ordered_json to_json(const std::vector<ProfileRecord>& records);

std::string format_table(const std::vector<ProfileRecord>& records);

}  // namespace mbrkit

#endif  // MBRKIT_PROFILER_HPP_
