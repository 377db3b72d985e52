/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace stlsynth {

static LogLevel parse_level() {
  const char *env = std::getenv("STLSYNTH_LOG");
  if (!env) return LogLevel::warn;
  if (!std::strcmp(env, "quiet")) return LogLevel::quiet;
  if (!std::strcmp(env, "error")) return LogLevel::error;
  if (!std::strcmp(env, "warn")) return LogLevel::warn;
  if (!std::strcmp(env, "info")) return LogLevel::info;
  if (!std::strcmp(env, "debug")) return LogLevel::debug;
  return LogLevel::warn;
}

LogLevel log_level() {
  static LogLevel lvl = parse_level();
  return lvl;
}

void log_msg(LogLevel lvl, const char *fmt, ...) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  const char *tag = "";
  switch (lvl) {
    case LogLevel::error: tag = "error"; break;
    case LogLevel::warn: tag = "warn"; break;
    case LogLevel::info: tag = "info"; break;
    case LogLevel::debug: tag = "debug"; break;
    case LogLevel::quiet: return;
  }
  std::fprintf(stderr, "[stlsynth:%s] ", tag);
  va_list ap;
  va_start(ap, fmt);
  std::vfprintf(stderr, fmt, ap);
  va_end(ap);
  std::fputc('\n', stderr);
}

} // namespace stlsynth
