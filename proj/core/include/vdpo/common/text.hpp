#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vdpo {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Strict parse of a whole string as a double; throws ConfigError on junk.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// `key = value` lines; `#` starts a comment; blank lines ignored.
/// Later keys override earlier ones. Throws ConfigError on malformed lines.
std::map<std::string, std::string> parse_key_values(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace vdpo
