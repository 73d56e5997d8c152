#pragma once

#include <filesystem>
#include <string>

namespace courtaudit {

// Shortest decimal text that round-trips to the same double; keeps emitted
// CSV/JSON byte-stable across runs.
std::string format_double(double value);

// Writes to a sibling temp file then renames over the target, so readers
// never observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace courtaudit
