#ifndef MBRKIT_SELFTEST_HPP_
#define MBRKIT_SELFTEST_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mbrkit {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestProperty {
  std::string name;
  std::function<SelfTestResult(std::uint64_t seed)> run;
};

// rambr-exactness, cbmbr-boundary, als-recovery, mode-selection.
const std::vector<SelfTestProperty>& selftest_properties();

}  // namespace mbrkit

#endif  // MBRKIT_SELFTEST_HPP_
