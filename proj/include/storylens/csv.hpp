#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storylens {

// RFC-4180 style quoting: fields containing comma, quote, or newline are
// quoted, quotes doubled.
std::string csv_escape(std::string_view field);

std::vector<std::string> csv_parse_line(std::string_view line);

// Shortest-ish deterministic rendering used in all CSV/JSON artifacts.
std::string fmt_double(double v);
std::string fmt_double(std::optional<double> v);  // absent renders empty

}  // namespace storylens
