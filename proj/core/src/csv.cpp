#include "metalcast/csv.hpp"

#include "metalcast/errors.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace metalcast::csv {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        auto pos = line.find(sep, begin);
        if (pos == std::string_view::npos) {
            out.emplace_back(trim(line.substr(begin)));
            break;
        }
        out.emplace_back(trim(line.substr(begin, pos - begin)));
        begin = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view text) {
    const auto* ws = " \t\r\n";
    auto first = text.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    auto last = text.find_last_not_of(ws);
    return text.substr(first, last - first + 1);
}

double to_double(std::string_view field, std::size_t line) {
    std::string buf(trim(field));
    if (buf.empty()) throw ParseError("empty numeric field", line);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || errno == ERANGE) {
        throw ParseError(fmt::format("invalid number '{}'", buf), line);
    }
    return v;
}

int to_int(std::string_view field, std::size_t line) {
    std::string buf(trim(field));
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(buf.c_str(), &end, 10);
    if (buf.empty() || end != buf.c_str() + buf.size() || errno == ERANGE) {
        throw ParseError(fmt::format("invalid integer '{}'", buf), line);
    }
    return static_cast<int>(v);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

}  // namespace metalcast::csv
