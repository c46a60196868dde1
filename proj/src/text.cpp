#include "dtshare/text.hpp"

#include "dtshare/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <system_error>

namespace dtshare {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

void for_each_key_value(
    std::istream& in,
    const std::function<void(const std::string&, const std::string&, std::size_t)>& fn) {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto text = trim(raw);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected 'key = value', got '" + text + "'");
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "missing key");
        if (value.empty()) throw ParseError(line, "missing value for '" + key + "'");
        fn(key, value, line);
    }
}

double parse_double(const std::string& text, std::size_t line) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError(line, "expected a number, got '" + text + "'");
    return v;
}

int parse_int(const std::string& text, std::size_t line) {
    int v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ParseError(line, "expected an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& text, std::size_t line) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError(line, "expected a non-negative integer, got '" + text + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

} // namespace dtshare
