#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dml {

// Shortest round-trip decimal form; locale independent, so emitted artifacts
// are byte-stable across runs.
std::string format_double(double value);

std::string join_doubles(const std::vector<double>& values, char sep);

double parse_double(const std::string& s);        // throws ParseError
std::int64_t parse_int(const std::string& s);     // throws ParseError
bool parse_bool(const std::string& s);            // throws ParseError

// Writes to path + ".tmp" then renames, so partial artifacts never appear.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);   // throws IoError

}  // namespace dml
