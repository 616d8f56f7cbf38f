#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace gesticulate {

// Flat "key: value" config text (a YAML subset): one pair per line, '#'
// comments, blank lines ignored.  Keys may not repeat.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

}  // namespace gesticulate
