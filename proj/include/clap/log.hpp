#pragma once

#include <string>

namespace clap {

// Levels follow the CLAP_LOG environment variable: error < info < debug.
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace clap
