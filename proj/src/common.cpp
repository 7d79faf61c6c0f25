#include "vizbox/common.hpp"

#include <algorithm>
#include <cctype>

namespace vizbox {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_missing_cell(const std::string& raw) {
    const std::string t = to_lower(trim(raw));
    return t.empty() || t == "null" || t == "none" || t == "na" || t == "n/a" || t == "nan";
}

}  // namespace vizbox
