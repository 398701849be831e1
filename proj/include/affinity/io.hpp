#pragma once

#include <filesystem>
#include <string>

namespace affinity {

// Shortest round-trip decimal form, locale-independent. Keeps CSV output
// byte-stable across runs.
std::string formatNumber(double v);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, const std::string& content);

// Quotes a CSV field only when it contains a comma, quote or newline.
std::string csvField(const std::string& s);

}  // namespace affinity
