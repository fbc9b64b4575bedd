#pragma once

#include <functional>
#include <string_view>

namespace rsclust {

using LogSink = std::function<void(std::string_view)>;

// Replaces the warning sink. An empty function silences warnings.
// Returns the previous sink.
LogSink set_warning_sink(LogSink sink);

void warn(std::string_view message);

// Silences warnings raised on the current thread while alive.
class ScopedQuiet {
 public:
  ScopedQuiet();
  ~ScopedQuiet();
  ScopedQuiet(const ScopedQuiet&) = delete;
  ScopedQuiet& operator=(const ScopedQuiet&) = delete;
};

}  // namespace rsclust
