#include "vizbox/column.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "vizbox/common.hpp"

namespace vizbox {

const char* to_string(DataType t) {
    switch (t) {
        case DataType::kInteger: return "integer";
        case DataType::kDecimal: return "decimal";
        case DataType::kString: return "string";
        case DataType::kDatetime: return "datetime";
    }
    return "?";
}

const char* to_string(GeneralType t) {
    switch (t) {
        case GeneralType::kQuantitative: return "q";
        case GeneralType::kCategorical: return "c";
        case GeneralType::kTemporal: return "t";
    }
    return "?";
}

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

int days_in_month(int y, int m) {
    static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[m - 1];
}

// days since 1970-01-01 for a civil date (proleptic Gregorian)
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct DateParts {
    int y, m, d;
    double secs = 0.0;
};

bool parse_time_part(const std::string& s, double* secs) {
    // HH:MM[:SS[.frac]]
    if (s.size() < 5 || s[2] != ':') return false;
    if (!std::isdigit(static_cast<unsigned char>(s[0])) ||
        !std::isdigit(static_cast<unsigned char>(s[1])) ||
        !std::isdigit(static_cast<unsigned char>(s[3])) ||
        !std::isdigit(static_cast<unsigned char>(s[4]))) {
        return false;
    }
    const int hh = (s[0] - '0') * 10 + (s[1] - '0');
    const int mm = (s[3] - '0') * 10 + (s[4] - '0');
    if (hh > 23 || mm > 59) return false;
    double ss = 0.0;
    std::size_t pos = 5;
    if (pos < s.size()) {
        if (s[pos] != ':' || s.size() < pos + 3) return false;
        if (!std::isdigit(static_cast<unsigned char>(s[pos + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s[pos + 2]))) {
            return false;
        }
        const int sec = (s[pos + 1] - '0') * 10 + (s[pos + 2] - '0');
        if (sec > 59) return false;
        ss = sec;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            double scale = 0.1;
            bool any = false;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                ss += (s[pos] - '0') * scale;
                scale *= 0.1;
                ++pos;
                any = true;
            }
            if (!any) return false;
        }
    }
    if (pos != s.size()) return false;
    *secs = hh * 3600.0 + mm * 60.0 + ss;
    return true;
}

bool parse_date_parts(const std::string& t, DateParts* out) {
    // YYYY
    if (t.size() == 4 && all_digits(t)) {
        out->y = std::stoi(t);
        out->m = 1;
        out->d = 1;
        return true;
    }
    // YYYY-MM-DD [time]
    if (t.size() >= 10 && t[4] == '-' && t[7] == '-') {
        const std::string ys = t.substr(0, 4), ms = t.substr(5, 2), ds = t.substr(8, 2);
        if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return false;
        out->y = std::stoi(ys);
        out->m = std::stoi(ms);
        out->d = std::stoi(ds);
        if (out->m < 1 || out->m > 12 || out->d < 1 || out->d > days_in_month(out->y, out->m)) {
            return false;
        }
        if (t.size() == 10) return true;
        if (t[10] != 'T' && t[10] != ' ') return false;
        std::string rest = t.substr(11);
        if (!rest.empty() && rest.back() == 'Z') rest.pop_back();
        return parse_time_part(rest, &out->secs);
    }
    // MM/DD/YYYY
    const auto s1 = t.find('/');
    if (s1 != std::string::npos) {
        const auto s2 = t.find('/', s1 + 1);
        if (s2 == std::string::npos || t.find('/', s2 + 1) != std::string::npos) return false;
        const std::string ms = t.substr(0, s1), ds = t.substr(s1 + 1, s2 - s1 - 1),
                          ys = t.substr(s2 + 1);
        if (ms.empty() || ms.size() > 2 || ds.empty() || ds.size() > 2 || ys.size() != 4) {
            return false;
        }
        if (!all_digits(ms) || !all_digits(ds) || !all_digits(ys)) return false;
        out->y = std::stoi(ys);
        out->m = std::stoi(ms);
        out->d = std::stoi(ds);
        return out->m >= 1 && out->m <= 12 && out->d >= 1 &&
               out->d <= days_in_month(out->y, out->m);
    }
    return false;
}

}  // namespace

std::optional<std::int64_t> parse_integer_cell(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    std::int64_t value = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+') ++first;  // from_chars rejects leading '+'
    if (first == last) return std::nullopt;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

std::optional<double> parse_decimal_cell(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+') ++first;
    if (first == last) return std::nullopt;
    const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<double> parse_datetime_cell(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    DateParts p;
    if (!parse_date_parts(t, &p)) return std::nullopt;
    return static_cast<double>(days_from_civil(p.y, p.m, p.d)) * 86400.0 + p.secs;
}

InferredType infer_column_type(const std::vector<std::string>& cells) {
    std::size_t present = 0, as_datetime = 0, as_integer = 0, as_decimal = 0;
    for (const auto& c : cells) {
        if (is_missing_cell(c)) continue;
        ++present;
        if (parse_datetime_cell(c)) ++as_datetime;
        if (parse_integer_cell(c)) ++as_integer;
        if (parse_decimal_cell(c)) ++as_decimal;
    }
    if (present == 0) return {DataType::kString, GeneralType::kCategorical};
    const double dt_frac = static_cast<double>(as_datetime) / static_cast<double>(present);
    if (dt_frac >= 0.95) return {DataType::kDatetime, GeneralType::kTemporal};
    if (as_integer == present) return {DataType::kInteger, GeneralType::kQuantitative};
    if (as_decimal == present) return {DataType::kDecimal, GeneralType::kQuantitative};
    return {DataType::kString, GeneralType::kCategorical};
}

std::size_t Column::missing_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) {
        if (is_missing_cell(c)) ++n;
    }
    return n;
}

std::vector<double> Column::numeric_values() const {
    std::vector<double> out;
    for (const auto& v : numeric) {
        if (v) out.push_back(*v);
    }
    return out;
}

std::vector<std::string> Column::present_cells() const {
    std::vector<std::string> out;
    for (const auto& c : cells) {
        if (!is_missing_cell(c)) out.push_back(c);
    }
    return out;
}

Column make_column(std::string name, std::vector<std::string> cells) {
    Column col;
    col.name = std::move(name);
    col.cells = std::move(cells);
    const auto t = infer_column_type(col.cells);
    col.data_type = t.data_type;
    col.general_type = t.general_type;
    col.numeric.resize(col.cells.size());
    for (std::size_t i = 0; i < col.cells.size(); ++i) {
        const auto& raw = col.cells[i];
        if (is_missing_cell(raw)) continue;
        if (col.general_type == GeneralType::kQuantitative) {
            col.numeric[i] = parse_decimal_cell(raw);
        } else if (col.general_type == GeneralType::kTemporal) {
            col.numeric[i] = parse_datetime_cell(raw);
        }
    }
    return col;
}

}  // namespace vizbox
