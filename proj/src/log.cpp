#include "pfr/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace pfr::log {
namespace {
std::atomic<Level> g_level{Level::warning};
std::mutex g_mutex;

const char* tag(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warning: return "warning";
    case Level::error: return "error";
    default: return "";
  }
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level level, std::string_view message) {
  if (level < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[pfr " << tag(level) << "] " << message << '\n';
}

}  // namespace pfr::log
