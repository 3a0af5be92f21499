#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <string>

namespace vaxopt::io {

/// printf-style "%.{digits}g".
std::string format_g(double v, int digits = 10);

/// Opens for writing; throws InputError naming the path on failure.
std::ofstream open_output(const std::string& path);
std::ifstream open_input(const std::string& path);

/// Creates the directory (and parents); throws InputError naming the path on failure.
void ensure_directory(const std::string& path);

/// Throws ConfigError if any listed key is present but is not a non-negative integer
/// (or an array of them). Guards unsigned fields against silent wrap-around.
void require_counts(const nlohmann::json& doc, std::initializer_list<const char*> keys);

} // namespace vaxopt::io
