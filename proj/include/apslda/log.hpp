#pragma once

#include <sstream>
#include <string>

namespace apslda {

enum class LogLevel : int { kError = 0, kInfo = 1, kDebug = 2 };

// Reads APSLDA_LOG={error|info|debug} once; defaults to info.
LogLevel log_level();
void set_log_level(LogLevel lv);

// Timestamps are suppressed in simulated mode so output is reproducible.
void set_log_timestamps(bool enabled);

void log_line(LogLevel lv, const std::string& msg);

}  // namespace apslda

#define APSLDA_LOG_AT(lv, expr)                                \
  do {                                                         \
    if (static_cast<int>(lv) <= static_cast<int>(::apslda::log_level())) { \
      std::ostringstream oss__;                                \
      oss__ << expr;                                           \
      ::apslda::log_line(lv, oss__.str());                     \
    }                                                          \
  } while (0)

#define LOG_ERROR(expr) APSLDA_LOG_AT(::apslda::LogLevel::kError, expr)
#define LOG_INFO(expr) APSLDA_LOG_AT(::apslda::LogLevel::kInfo, expr)
#define LOG_DEBUG(expr) APSLDA_LOG_AT(::apslda::LogLevel::kDebug, expr)
