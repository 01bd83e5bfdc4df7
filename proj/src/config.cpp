#include "iaei/config.hpp"

#include <cctype>
#include <charconv>

#include "iaei/csv.hpp"

namespace iaei {

namespace {

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string strip_comment(const std::string& line) {
    for (size_t i = 0; i < line.size(); ++i)
        if (line[i] == '#' || line[i] == ';') return line.substr(0, i);
    return line;
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile config;
    std::string section;
    size_t line_number = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t stop = text.find('\n', start);
        if (stop == std::string::npos) stop = text.size();
        ++line_number;
        std::string line = trim(strip_comment(text.substr(start, stop - start)));
        start = stop + 1;
        if (line.empty()) {
            if (stop == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("config line " + std::to_string(line_number) +
                                 ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_number) +
                             ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("config line " + std::to_string(line_number) +
                             ": empty key");
        config.sections_[section][key] = value;
        if (stop == text.size()) break;
    }
    return config;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    return parse_string(read_text_file(path));
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return get(section, key).has_value();
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
    const auto sec = sections_.find(section);
    if (sec == sections_.end()) return std::nullopt;
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    return it->second;
}

std::string ConfigFile::require(const std::string& section,
                                const std::string& key) const {
    const auto value = get(section, key);
    if (!value)
        throw SchemaError("config: missing key '" + key + "' in section [" +
                          section + "]");
    return *value;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return get(section, key).value_or(fallback);
}

namespace {

double to_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ParseError("config: cannot parse '" + s + "' as a number for " + where);
    return v;
}

}  // namespace

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const auto v = get(section, key);
    return v ? to_double(*v, key) : fallback;
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    int out = 0;
    const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
    if (r.ec != std::errc{} || r.ptr != v->data() + v->size())
        throw ParseError("config: cannot parse '" + *v + "' as an integer for " + key);
    return out;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
    if (r.ec != std::errc{} || r.ptr != v->data() + v->size())
        throw ParseError("config: cannot parse '" + *v + "' as an unsigned integer for " +
                         key);
    return out;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ParseError("config: cannot parse '" + *v + "' as a boolean for " + key);
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
    const auto v = get(section, key);
    std::vector<std::string> out;
    if (!v) return out;
    size_t start = 0;
    while (start <= v->size()) {
        size_t stop = v->find(',', start);
        if (stop == std::string::npos) stop = v->size();
        const std::string item = trim(v->substr(start, stop - start));
        if (!item.empty()) out.push_back(item);
        if (stop == v->size()) break;
        start = stop + 1;
    }
    return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : get_list(section, key))
        out.push_back(to_double(item, key));
    return out;
}

}  // namespace iaei
