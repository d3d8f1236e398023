#pragma once

#include <string>

namespace frist {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Level from the FRIST_LOG environment variable (quiet, info, debug);
/// defaults to info.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_info(const std::string& message);
void log_debug(const std::string& message);
/// Warnings are shown unless the level is quiet.
void log_warn(const std::string& message);

}  // namespace frist
