#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "embedfit/embedding.hpp"
#include "embedfit/eval.hpp"

namespace embedfit::io {

// EMB1 layout, all integers little-endian:
//   "EMB1" | u32 version (1) | u32 dim | u32 count
//   count x [u32 name_length | name bytes (UTF-8)]
//   count * dim binary32 values, row-major in record order
// Values are stored as binary32; doubles are rounded on write.
inline constexpr std::uint32_t kEmb1Version = 1;

std::vector<std::uint8_t> encode_emb1(const EmbeddingSet& set);
EmbeddingSet decode_emb1(const std::vector<std::uint8_t>& bytes);

EmbeddingSet read_emb1(const std::filesystem::path& path);
void write_emb1(const EmbeddingSet& set, const std::filesystem::path& path);

// Adds or replaces records in an EMB1 file, creating it if needed.
void upsert_emb1(const std::filesystem::path& path, const std::vector<Embedding>& records);

// "file.emb1:name" -> (file.emb1, name). The split is at the last ':'.
std::pair<std::filesystem::path, std::string> parse_record_ref(const std::string& ref);
Embedding read_record(const std::string& ref);

bool valid_utf8(std::string_view s);

// Labels CSV: header "name,label", one row per record, no quoting; a field
// containing a comma is rejected.
using LabelRows = std::vector<std::pair<std::string, std::string>>;
LabelRows read_labels(const std::filesystem::path& path);
void write_labels(const LabelRows& rows, const std::filesystem::path& path);

// Pairs every embedding with its label; all names must be labeled.
LabeledImageSet attach_labels(const EmbeddingSet& set, const LabelRows& rows);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace embedfit::io
