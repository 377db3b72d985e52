/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <cstdarg>

namespace stlsynth {

enum class LogLevel { quiet = 0, error, warn, info, debug };

/// Current level, initialized once from the STLSYNTH_LOG environment
/// variable (quiet|error|warn|info|debug, default warn).
LogLevel log_level();

void log_msg(LogLevel lvl, const char *fmt, ...)
    __attribute__((format(printf, 2, 3)));

#define STLSYNTH_LOG_ERROR(...) ::stlsynth::log_msg(::stlsynth::LogLevel::error, __VA_ARGS__)
#define STLSYNTH_LOG_WARN(...)  ::stlsynth::log_msg(::stlsynth::LogLevel::warn, __VA_ARGS__)
#define STLSYNTH_LOG_INFO(...)  ::stlsynth::log_msg(::stlsynth::LogLevel::info, __VA_ARGS__)
#define STLSYNTH_LOG_DEBUG(...) ::stlsynth::log_msg(::stlsynth::LogLevel::debug, __VA_ARGS__)

} // namespace stlsynth
