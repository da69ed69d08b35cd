#pragma once
// Error taxonomy shared by every module. All failures surface as an Error
// carrying a stable code plus a module-qualified, human-readable message;
// the CLI maps them to one-line diagnostics and exit code 1.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace priorshift {

enum class ErrorCode {
    negative_entry,
    sum_not_one,
    too_few_classes,
    row_sum_out_of_tolerance,
    empty_matrix,
    empty_input,
    dimension_mismatch,
    label_out_of_range,
    parse_error,
    io_error,
    non_finite_input,
    absolute_continuity_violation,
    degenerate_row,
    non_finite_gradient,
    split_too_small,
    bad_separability,
    invalid_config,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::negative_entry: return "negative_entry";
        case ErrorCode::sum_not_one: return "sum_not_one";
        case ErrorCode::too_few_classes: return "too_few_classes";
        case ErrorCode::row_sum_out_of_tolerance: return "row_sum_out_of_tolerance";
        case ErrorCode::empty_matrix: return "empty_matrix";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::label_out_of_range: return "label_out_of_range";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::non_finite_input: return "non_finite_input";
        case ErrorCode::absolute_continuity_violation: return "absolute_continuity_violation";
        case ErrorCode::degenerate_row: return "degenerate_row";
        case ErrorCode::non_finite_gradient: return "non_finite_gradient";
        case ErrorCode::split_too_small: return "split_too_small";
        case ErrorCode::bad_separability: return "bad_separability";
        case ErrorCode::invalid_config: return "invalid_config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Syntax-level failure while reading a file. Line and column are 1-based.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error(ErrorCode::parse_error,
                "parse error at line " + std::to_string(line) + ", column " +
                    std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace priorshift
