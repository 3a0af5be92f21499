#include "vaxopt/io.hpp"

#include "vaxopt/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <system_error>

namespace vaxopt::io {

std::string format_g(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot open '" + path + "' for writing");
    }
    return out;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    return in;
}

void ensure_directory(const std::string& path)
{
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec || !std::filesystem::is_directory(path)) {
        throw InputError("cannot create directory '" + path + "'");
    }
}

void require_counts(const nlohmann::json& doc, std::initializer_list<const char*> keys)
{
    const auto is_count = [](const nlohmann::json& v) {
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    };
    for (const char* key : keys) {
        if (!doc.contains(key)) {
            continue;
        }
        const auto& v = doc.at(key);
        bool ok = is_count(v);
        if (v.is_array()) {
            ok = true;
            for (const auto& e : v) {
                ok = ok && is_count(e);
            }
        }
        if (!ok) {
            throw ConfigError(std::string(key) + " must be a non-negative integer");
        }
    }
}

} // namespace vaxopt::io
