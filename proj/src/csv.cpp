#include "funcount/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "funcount/error.hpp"

namespace funcount::csv {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("csv", fmt::format("missing column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("csv", fmt::format("cannot open '{}'", path.string()));

    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InputError("csv", fmt::format("{}:{}: expected {} fields, found {}", path.string(),
                                                line_no, table.header.size(), fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw InputError("csv", fmt::format("'{}' is empty", path.string()));
    return table;
}

bool is_missing(std::string_view field) {
    return field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == ".";
}

double parse_double(std::string_view field, std::string_view what) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InputError("csv", fmt::format("cannot parse '{}' as a number ({})", field, what));
    }
    return value;
}

long long parse_integer(std::string_view field, std::string_view what) {
    long long value = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        // Accept integral values written as decimals, e.g. "12.0".
        const double d = parse_double(field, what);
        if (d != static_cast<double>(static_cast<long long>(d))) {
            throw InputError("csv", fmt::format("'{}' is not an integer ({})", field, what));
        }
        return static_cast<long long>(d);
    }
    return value;
}

std::string format_double(double value) { return fmt::format("{}", value); }

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("csv", fmt::format("cannot write '{}'", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw InputError("csv", fmt::format("write failed for '{}'", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace funcount::csv
