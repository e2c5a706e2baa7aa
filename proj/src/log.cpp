#include "apslda/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace apslda {

namespace {

std::atomic<int> g_level{-1};
std::atomic<bool> g_timestamps{true};
std::mutex g_mutex;

int level_from_env() {
  const char* env = std::getenv("APSLDA_LOG");
  if (env == nullptr) return static_cast<int>(LogLevel::kInfo);
  if (std::strcmp(env, "error") == 0) return static_cast<int>(LogLevel::kError);
  if (std::strcmp(env, "debug") == 0) return static_cast<int>(LogLevel::kDebug);
  return static_cast<int>(LogLevel::kInfo);
}

}  // namespace

LogLevel log_level() {
  int lv = g_level.load(std::memory_order_relaxed);
  if (lv < 0) {
    lv = level_from_env();
    g_level.store(lv, std::memory_order_relaxed);
  }
  return static_cast<LogLevel>(lv);
}

void set_log_level(LogLevel lv) { g_level.store(static_cast<int>(lv), std::memory_order_relaxed); }

void set_log_timestamps(bool enabled) { g_timestamps.store(enabled, std::memory_order_relaxed); }

void log_line(LogLevel lv, const std::string& msg) {
  const char* tag = lv == LogLevel::kError ? "E" : (lv == LogLevel::kInfo ? "I" : "D");
  std::lock_guard<std::mutex> lock(g_mutex);
  if (g_timestamps.load(std::memory_order_relaxed)) {
    using namespace std::chrono;
    auto ms = duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
    std::fprintf(stderr, "[%s %lld] %s\n", tag, static_cast<long long>(ms), msg.c_str());
  } else {
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
  }
}

}  // namespace apslda
