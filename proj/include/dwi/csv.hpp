#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dwi::csv {

// Splits one record. Handles double-quoted fields with "" escapes.
std::vector<std::string> split_record(std::string_view line);

// Strict number parse: the whole field must be consumed.
std::optional<double> parse_number(std::string_view field);

// Shortest round-trip text form; identical bytes on every run.
std::string format_number(double value);

std::string quote_if_needed(std::string_view field);

}  // namespace dwi::csv
