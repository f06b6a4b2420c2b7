#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shna::tsv {

/// Splits a line on tabs. Trailing '\r' is stripped.
std::vector<std::string_view> split(std::string_view line);

/// Calls `row(fields, line_number)` for every non-blank, non-comment line.
/// Throws ParseError if the file cannot be opened.
void for_each_row(const std::filesystem::path& file,
                  const std::function<void(std::span<const std::string_view>, std::size_t)>& row);

/// Opens a file for writing; throws Error on failure.
std::ofstream open_output(const std::filesystem::path& file);

/// Shortest round-trippable decimal representation.
std::string format_double(double value);

double parse_double(std::string_view text, const std::string& where);
long long parse_int(std::string_view text, const std::string& where);

}  // namespace shna::tsv
