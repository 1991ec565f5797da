#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace funcount::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws InputError when absent.
    std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file with a header row. Fields are trimmed;
/// double-quoted fields may contain commas. Every row must have as many
/// fields as the header.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

bool is_missing(std::string_view field);

double parse_double(std::string_view field, std::string_view what);
long long parse_integer(std::string_view field, std::string_view what);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace funcount::csv
