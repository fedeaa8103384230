#pragma once

#include "causagen/table.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace causagen {

// RFC-4180 records. Quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Header must equal the schema names in order. Categorical cells are labels
// from the schema's closed category set.
Table parse_table(std::string_view text, const Schema& schema);
Table load_table(const std::filesystem::path& path, const Schema& schema);

// Header-only read, for callers that want an all-numeric default schema.
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

// Numbers are written in shortest round-trip form, so
// load_table(save_table(t)) reproduces t bit-for-bit.
std::string format_table(const Table& t);
void save_table(const std::filesystem::path& path, const Table& t);

std::string format_double(double v);
std::string quote_csv_field(std::string_view field);

}  // namespace causagen
