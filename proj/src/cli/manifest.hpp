#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace funcount::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    std::optional<std::uint64_t> seed;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;  // relative to the output directory
};

/// Writes `run_manifest.json` into `dir`. Paths are stored as given, so two
/// runs with the same relative paths produce the same bytes.
void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

}  // namespace funcount::cli
