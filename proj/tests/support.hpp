#ifndef MBRKIT_TESTS_SUPPORT_HPP_
#define MBRKIT_TESTS_SUPPORT_HPP_

#include <map>
#include <string>
#include <utility>

#include "mbrkit/metrics.hpp"

namespace mbrkit::testing {

// u(h, r) = 1 iff h == r.
class IndicatorMetric final : public Metric {
 public:
  const MetricDescriptor& descriptor() const override {
    static const MetricDescriptor d{"indicator", true, false, false};
    return d;
  }
  double score(std::string_view h, std::string_view r) const override {
    return h == r ? 1.0 : 0.0;
  }
};

// Utility looked up from a fixed table; missing pairs score 0.
class TableMetric final : public Metric {
 public:
  explicit TableMetric(bool higher_better = true)
      : d_{"table", higher_better, false, false} {}
  void set(const std::string& h, const std::string& r, double v) {
    table_[{h, r}] = v;
  }
  const MetricDescriptor& descriptor() const override { return d_; }
  double score(std::string_view h, std::string_view r) const override {
    auto it = table_.find({std::string(h), std::string(r)});
    return it == table_.end() ? 0.0 : it->second;
  }

 private:
  MetricDescriptor d_;
  std::map<std::pair<std::string, std::string>, double> table_;
};

}  // namespace mbrkit::testing

#endif  // MBRKIT_TESTS_SUPPORT_HPP_
