#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace addkit {

/// Receives non-fatal numerical warnings (unimodality violations, clipped
/// ringing mass, ...). The default handler prints to stderr.
using WarningHandler = std::function<void(std::string_view)>;

/// Installs a handler and returns the previous one. Passing an empty
/// function silences warnings (they are still counted).
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

/// Number of warnings emitted since process start.
std::size_t warning_count() noexcept;

}  // namespace addkit
