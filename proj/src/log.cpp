#include "qdynkit/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace qdk::log {

namespace {

thread_local Sink current;
std::mutex stderr_mutex;

void emit(Level level, const std::string& message) {
    if (current) {
        current(level, message);
        return;
    }
    if (level == Level::warn) {
        std::lock_guard lock(stderr_mutex);
        std::cerr << "warning: " << message << '\n';
    }
}

} // namespace

Sink set_thread_sink(Sink sink) { return std::exchange(current, std::move(sink)); }

void info(const std::string& message) { emit(Level::info, message); }

void warn(const std::string& message) { emit(Level::warn, message); }

} // namespace qdk::log
