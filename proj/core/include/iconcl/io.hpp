#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace iconcl {

// All binary artifacts are little-endian float32; shapes live in meta.json
// next to the payload.
void write_f32(const std::filesystem::path& path, const std::vector<float>& data);
std::vector<float> read_f32(const std::filesystem::path& path, std::size_t expected_count);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<float> to_f32(const std::vector<double>& v);
std::vector<double> to_f64(const std::vector<float>& v);

} // namespace iconcl
