#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vizbox {

enum class DataType { kInteger, kDecimal, kString, kDatetime };
enum class GeneralType { kQuantitative, kCategorical, kTemporal };

const char* to_string(DataType t);
const char* to_string(GeneralType t);

// Closed, locale-independent cell grammars. Numbers go through from_chars;
// "inf"/"nan" spellings are rejected (they stay strings). Datetimes accept
// YYYY, YYYY-MM-DD, YYYY-MM-DD[T ]HH:MM[:SS[.frac]][Z] and MM/DD/YYYY, all
// calendar-validated.
std::optional<std::int64_t> parse_integer_cell(const std::string& raw);
std::optional<double> parse_decimal_cell(const std::string& raw);
// seconds since 1970-01-01 00:00:00 (bare years/dates map to their first instant)
std::optional<double> parse_datetime_cell(const std::string& raw);

struct InferredType {
    DataType data_type;
    GeneralType general_type;
};

// Type inference over non-missing cells: >= 95% datetime wins first; then
// all-integer; then all-numeric (decimal); otherwise string/categorical.
// An all-missing column is string/categorical.
InferredType infer_column_type(const std::vector<std::string>& cells);

struct Column {
    std::string name;
    std::vector<std::string> cells;  // raw, may contain missing entries
    DataType data_type = DataType::kString;
    GeneralType general_type = GeneralType::kCategorical;

    // Cached per-cell domain values for quantitative/temporal columns:
    // parsed number or epoch seconds, nullopt where missing/unparseable.
    std::vector<std::optional<double>> numeric;

    std::size_t missing_count() const;
    // non-missing parsed values in cell order
    std::vector<double> numeric_values() const;
    // non-missing raw cells in cell order
    std::vector<std::string> present_cells() const;
};

// Builds a Column with inferred types and cached numeric domain values.
Column make_column(std::string name, std::vector<std::string> cells);

}  // namespace vizbox
