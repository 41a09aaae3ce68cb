#include "clap/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace clap {

namespace {

LogLevel parse_level() {
  const char* raw = std::getenv("CLAP_LOG");
  if (raw == nullptr) return LogLevel::Info;
  const std::string v(raw);
  if (v == "error") return LogLevel::Error;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void emit(LogLevel level, const char* tag, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << tag << msg << '\n';
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_error(const std::string& msg) { emit(LogLevel::Error, "error: ", msg); }
void log_info(const std::string& msg) { emit(LogLevel::Info, "", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::Debug, "debug: ", msg); }

}  // namespace clap
