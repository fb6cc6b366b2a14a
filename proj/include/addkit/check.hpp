#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace addkit {

/// One itemized numerical check: `value` is compared against `threshold`
/// by the producing operation, which decides `pass`.
struct CheckItem {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct CheckReport {
  std::string name;
  std::vector<CheckItem> items;

  /// Conjunction of item verdicts; an empty report does not pass.
  bool pass() const {
    return !items.empty() && std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.pass; });
  }

  CheckItem& add(std::string item_name, double value, double threshold, bool ok, std::string note = {}) {
    items.push_back({std::move(item_name), value, threshold, ok, std::move(note)});
    return items.back();
  }

  /// Adds "value <= threshold".
  CheckItem& add_bound(std::string item_name, double value, double threshold, std::string note = {}) {
    return add(std::move(item_name), value, threshold, value <= threshold, std::move(note));
  }

  void append(const CheckReport& other, const std::string& prefix = {}) {
    for (const auto& i : other.items) items.push_back({prefix + i.name, i.value, i.threshold, i.pass, i.note});
  }
};

}  // namespace addkit
