#include "vstep/ini.hpp"

#include <algorithm>

#include "vstep/errors.hpp"

namespace vstep {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<std::string> IniSection::get(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<IniSection> parse_ini(std::string_view text) {
  std::vector<IniSection> sections;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset <= text.size()) {
    const std::size_t end = std::min(text.find('\n', offset), text.size());
    const std::size_t line_start = offset;
    std::string_view line = text.substr(offset, end - offset);
    offset = end + 1;
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + ": unterminated section header", line_start);
      const auto inner = trim(line.substr(1, line.size() - 2));
      if (inner.empty()) throw ParseError(where + ": empty section header", line_start);
      IniSection section;
      section.line = line_no;
      const auto space = inner.find_first_of(" \t");
      section.kind = std::string(inner.substr(0, space));
      if (space != std::string_view::npos) section.name = std::string(trim(inner.substr(space)));
      sections.push_back(std::move(section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(where + ": expected key = value", line_start);
    }
    if (sections.empty()) {
      throw ParseError(where + ": key outside of any section", line_start);
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(where + ": empty key", line_start);
    auto& entries = sections.back().entries;
    for (const auto& [k, v] : entries) {
      if (k == key) throw ParseError(where + ": duplicate key '" + std::string(key) + "'", line_start);
    }
    entries.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return sections;
}

}  // namespace vstep
