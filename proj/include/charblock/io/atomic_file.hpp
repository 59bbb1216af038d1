#pragma once

#include <string>

namespace charblock {

// Writes content to path via a temp file + rename so readers never observe a
// partial file. Creates parent directories as needed.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// FNV-1a over bytes, rendered as 16 hex chars; used to pair reports with the
// resolved config that produced them.
std::string content_hash(const std::string& content);

}  // namespace charblock
