#pragma once

#include <string>

namespace parkcast {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Current verbosity, read once from the PARKCAST_LOG environment variable
/// ("error", "warn", "info", "debug"; default "warn").
LogLevel log_level();

/// Writes one line to stderr when `level` is within the current verbosity.
void log_line(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log_line(LogLevel::Error, m); }
inline void log_warn(const std::string& m) { log_line(LogLevel::Warn, m); }
inline void log_info(const std::string& m) { log_line(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_line(LogLevel::Debug, m); }

}  // namespace parkcast
