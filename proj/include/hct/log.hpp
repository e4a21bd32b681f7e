#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hct {

using WarningSink = std::function<void(std::string_view)>;

// Installs a process-wide warning sink and returns the previous one. Passing
// an empty function restores the default (stderr).
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

// Captures warnings for the lifetime of the object.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  WarningSink previous_;
  std::vector<std::string> messages_;
};

}  // namespace hct
