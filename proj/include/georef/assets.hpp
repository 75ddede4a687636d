#pragma once

#include <optional>
#include <string_view>

namespace georef {

/// Text asset compiled in from assets/, looked up by its path relative to
/// that directory (e.g. "prompts/cot.txt"). A single trailing newline is
/// stripped at build time.
std::optional<std::string_view> embedded_asset(std::string_view relative_path);

}  // namespace georef
