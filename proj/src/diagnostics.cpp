#include "addkit/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

namespace addkit {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](std::string_view msg) {
    std::cerr << "addkit warning: " << msg << '\n';
  };
  return h;
}

std::atomic<std::size_t> g_count{0};

}  // namespace

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  std::swap(handler(), h);
  return h;
}

void warn(std::string_view message) {
  g_count.fetch_add(1, std::memory_order_relaxed);
  std::lock_guard lock(handler_mutex());
  if (handler()) handler()(message);
}

std::size_t warning_count() noexcept { return g_count.load(std::memory_order_relaxed); }

}  // namespace addkit
