#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdist/filtering.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

/// Binary vector file:
///   bytes 0-3   ASCII "SDV1"
///   bytes 4-7   n, uint32 little-endian
///   bytes 8-11  d, uint32 little-endian
///   then n*d IEEE-754 float32 little-endian values, row-major.
inline constexpr std::string_view kVectorFileMagic = "SDV1";
inline constexpr std::size_t kVectorFileHeaderBytes = 12;

std::string encode_vector_file(const VectorSet& set);
VectorSet decode_vector_file(std::string_view bytes);

VectorSet read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path, const VectorSet& set);

/// Shortest-of-%g rendering with 9 significant digits, C locale.
std::string format_real(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// `id,score` CSV.
std::string scores_csv(std::span<const ScoredItem> scores);
std::vector<ScoredItem> parse_scores_csv(std::string_view text);
std::vector<ScoredItem> read_scores_csv(const std::filesystem::path& path);

/// One id per line.
std::string kept_ids_text(std::span<const ScoredItem> scores, std::span<const std::size_t> kept);

/// `key=value` lines, keys in the given order.
std::string key_value_text(const std::vector<std::pair<std::string, std::string>>& entries);
std::map<std::string, std::string> parse_key_value_text(std::string_view text);

}  // namespace sdist
