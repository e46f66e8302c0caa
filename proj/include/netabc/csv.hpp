#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace netabc {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

// Headered, comma-separated, LF-terminated table read fully into memory.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws std::runtime_error if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// key=value text with '#' comments. Later keys replace earlier ones.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues read_key_values(const std::filesystem::path& path);

const std::string& require_key(const KeyValues& kv, std::string_view key);

}  // namespace netabc
