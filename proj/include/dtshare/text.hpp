#pragma once

// Helpers for the key=value text formats used by parameter and scenario files.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dtshare {

// Calls `fn(key, value, line)` for every "key = value" line. Blank lines and
// '#' comments are skipped; anything else throws ParseError with its line.
void for_each_key_value(
    std::istream& in,
    const std::function<void(const std::string&, const std::string&, std::size_t)>& fn);

double parse_double(const std::string& text, std::size_t line);
int parse_int(const std::string& text, std::size_t line);
std::uint64_t parse_u64(const std::string& text, std::size_t line);
std::string trim(std::string s);
std::vector<std::string> split(const std::string& s, char sep);

// Shortest round-trip decimal form; stable across runs.
std::string format_double(double v);

} // namespace dtshare
