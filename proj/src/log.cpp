#include "rsclust/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace rsclust {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink() {
  static LogSink s = [](std::string_view msg) { std::cerr << "[rsclust] warning: " << msg << '\n'; };
  return s;
}

thread_local int quiet_depth = 0;

}  // namespace

ScopedQuiet::ScopedQuiet() { ++quiet_depth; }
ScopedQuiet::~ScopedQuiet() { --quiet_depth; }

LogSink set_warning_sink(LogSink next) {
  std::lock_guard lock(sink_mutex());
  LogSink previous = std::move(sink());
  sink() = std::move(next);
  return previous;
}

void warn(std::string_view message) {
  if (quiet_depth > 0) return;
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

}  // namespace rsclust
