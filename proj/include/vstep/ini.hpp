#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vstep {

/// One "[kind name]" block of a flat key = value file.
struct IniSection {
  std::string kind;
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(std::string_view key) const;
};

/// Parses '[kind]' or '[kind name]' headers followed by 'key = value' lines.
/// '#' and ';' start comments; blank lines are ignored. Throws ParseError.
std::vector<IniSection> parse_ini(std::string_view text);

}  // namespace vstep
