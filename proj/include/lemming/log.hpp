#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace lemming::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Threshold from LEMMING_LOG_LEVEL (error|warn|info|debug), default warn.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("LEMMING_LOG_LEVEL");
    if (!env) return Level::kWarn;
    const std::string_view v(env);
    if (v == "error") return Level::kError;
    if (v == "info") return Level::kInfo;
    if (v == "debug") return Level::kDebug;
    return Level::kWarn;
  }();
  return level;
}

inline void write(Level level, std::string_view msg) {
  if (level > threshold()) return;
  static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
  std::cerr << "[lemming " << kNames[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void error(std::string_view m) { write(Level::kError, m); }
inline void warn(std::string_view m) { write(Level::kWarn, m); }
inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void debug(std::string_view m) { write(Level::kDebug, m); }

}  // namespace lemming::log
