#pragma once

#include <string>
#include <utility>
#include <vector>

namespace memjoule {

// Collects non-fatal diagnostics. Operations that can warn accept an
// optional WarningLog*; passing nullptr drops the messages.
class WarningLog {
 public:
  void add(std::string message) { messages_.push_back(std::move(message)); }

  const std::vector<std::string>& messages() const noexcept { return messages_; }
  bool empty() const noexcept { return messages_.empty(); }
  std::size_t size() const noexcept { return messages_.size(); }
  void clear() noexcept { messages_.clear(); }

  bool contains(const std::string& needle) const {
    for (const auto& m : messages_) {
      if (m.find(needle) != std::string::npos) return true;
    }
    return false;
  }

 private:
  std::vector<std::string> messages_;
};

inline void warn(WarningLog* log, std::string message) {
  if (log != nullptr) log->add(std::move(message));
}

}  // namespace memjoule
