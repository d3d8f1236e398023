#include "frist/log.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <iostream>

namespace frist {

namespace {

LogLevel from_env() {
  const char* v = std::getenv("FRIST_LOG");
  if (v == nullptr) return LogLevel::info;
  if (std::strcmp(v, "quiet") == 0) return LogLevel::quiet;
  if (std::strcmp(v, "debug") == 0) return LogLevel::debug;
  return LogLevel::info;
}

std::atomic<int>& level_storage() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

void emit(const char* tag, const std::string& message) {
  std::cerr << "[frist " << tag << "] " << message << '\n';
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_storage().load()); }
void set_log_level(LogLevel level) { level_storage().store(static_cast<int>(level)); }

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::info) emit("info", message);
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::debug) emit("debug", message);
}

void log_warn(const std::string& message) {
  if (log_level() >= LogLevel::info) emit("warn", message);
}

}  // namespace frist
