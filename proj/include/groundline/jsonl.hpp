#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace groundline {

using json = nlohmann::json;

// Parse a JSONL file; throws SchemaError naming the offending line.
std::vector<json> read_jsonl(const std::filesystem::path& path);

// Serialize one object per line.
std::string to_jsonl(const std::vector<json>& records);

// Write via temp file + rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Stderr warning with a stable prefix; pipelines keep running past these.
void warn(const std::string& message);

}  // namespace groundline
