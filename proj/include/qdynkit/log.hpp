#pragma once

#include <functional>
#include <string>

namespace qdk::log {

enum class Level { info, warn };

using Sink = std::function<void(Level, const std::string&)>;

/// Installs a sink for the calling thread and returns the previous one. An
/// empty sink restores the default, which writes warnings to stderr and drops
/// info messages.
Sink set_thread_sink(Sink sink);

void info(const std::string& message);
void warn(const std::string& message);

} // namespace qdk::log
