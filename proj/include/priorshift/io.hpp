#pragma once
// Bit-exact file I/O for the four on-disk formats:
//   priors  - one real per line, '#' comments, LF or CRLF
//   posteriors - CSV, N rows x K columns, optional header (auto-detected)
//   labels  - one 0-based class index per line
//   traces  - CSV: iteration, objective, max_change, K estimate columns
//             (estimate cells empty on thinned iterations), plus a trailing
//             "# termination <reason>" line
//
// Values are written with the shortest decimal that round-trips the double,
// so write-then-read is the identity and outputs diff cleanly across runs.
// All writers go through a temp file followed by a rename.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "priorshift/error.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

inline std::string format_value(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_value(std::string_view token, std::size_t line, std::size_t column) {
    double value = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        const std::size_t bad = column + static_cast<std::size_t>(res.ptr - token.data());
        throw ParseError(line, bad, "expected a number, got '" + std::string(token) + "'");
    }
    return value;
}

inline std::size_t parse_index(std::string_view token, std::size_t line, std::size_t column) {
    std::size_t value = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw ParseError(line, column, "expected a nonnegative integer, got '" +
                                           std::string(token) + "'");
    return value;
}

// Trims spaces/tabs and a trailing CR; returns the view plus the 1-based
// column where it starts.
inline std::pair<std::string_view, std::size_t> trim(std::string_view text) {
    std::size_t begin = 0;
    while (begin < text.size() && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
    std::size_t end = text.size();
    while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' ||
                           text[end - 1] == '\r'))
        --end;
    return {text.substr(begin, end - begin), begin + 1};
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_error, "io: cannot open '" + path.string() + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (in.bad())
        throw Error(ErrorCode::io_error, "io: read failure on '" + path.string() + "'");
    return lines;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& payload) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::io_error,
                        "io: cannot open '" + tmp.string() + "' for writing");
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out)
            throw Error(ErrorCode::io_error, "io: write failure on '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::io_error,
                    "io: cannot move '" + tmp.string() + "' to '" + path.string() + "'");
    }
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline bool all_numeric(const std::vector<std::string_view>& fields) {
    for (auto raw : fields) {
        auto [token, col] = trim(raw);
        (void)col;
        double v = 0.0;
        auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return false;
    }
    return true;
}

}  // namespace detail

inline PriorVector read_prior(const std::filesystem::path& path) {
    std::vector<double> values;
    const auto lines = detail::read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string_view text = lines[n];
        const std::size_t hash = text.find('#');
        if (hash != std::string_view::npos) text = text.substr(0, hash);
        auto [token, column] = detail::trim(text);
        if (token.empty()) continue;
        values.push_back(detail::parse_value(token, n + 1, column));
    }
    return PriorVector::validate(std::move(values));
}

inline void write_prior(const std::filesystem::path& path, const PriorVector& prior) {
    std::string payload;
    for (std::size_t k = 0; k < prior.size(); ++k) {
        payload += format_value(prior[k]);
        payload += '\n';
    }
    detail::write_file_atomic(path, payload);
}

inline PosteriorMatrix read_posteriors(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool first_content_line = true;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        auto [content, col0] = detail::trim(lines[n]);
        (void)col0;
        if (content.empty()) continue;
        const auto fields = detail::split_csv(content);
        if (first_content_line) {
            first_content_line = false;
            if (!detail::all_numeric(fields)) continue;  // header row
        }
        if (cols == 0) {
            cols = fields.size();
        } else if (fields.size() != cols) {
            throw ParseError(n + 1, 1,
                             "expected " + std::to_string(cols) + " columns, got " +
                                 std::to_string(fields.size()));
        }
        std::size_t offset = 1;
        for (auto raw : fields) {
            auto [token, rel] = detail::trim(raw);
            data.push_back(detail::parse_value(token, n + 1, offset + rel - 1));
            offset += raw.size() + 1;
        }
        ++rows;
    }
    if (rows == 0)
        throw Error(ErrorCode::empty_matrix,
                    "io: '" + path.string() + "' contains no posterior rows");
    return PosteriorMatrix::validate(rows, cols, std::move(data));
}

inline void write_posteriors(const std::filesystem::path& path, const PosteriorMatrix& matrix) {
    std::string payload;
    for (std::size_t k = 0; k < matrix.cols(); ++k) {
        if (k > 0) payload += ',';
        payload += 'c';
        payload += std::to_string(k);
    }
    payload += '\n';
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        auto row = matrix.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k > 0) payload += ',';
            payload += format_value(row[k]);
        }
        payload += '\n';
    }
    detail::write_file_atomic(path, payload);
}

inline LabelVector read_labels(const std::filesystem::path& path, std::size_t num_classes) {
    std::vector<std::size_t> labels;
    const auto lines = detail::read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string_view text = lines[n];
        const std::size_t hash = text.find('#');
        if (hash != std::string_view::npos) text = text.substr(0, hash);
        auto [token, column] = detail::trim(text);
        if (token.empty()) continue;
        const std::size_t label = detail::parse_index(token, n + 1, column);
        if (label >= num_classes)
            throw ParseError(n + 1, column,
                             "class index " + std::to_string(label) + " is outside [0, " +
                                 std::to_string(num_classes) + ")");
        labels.push_back(label);
    }
    return LabelVector::validate(std::move(labels), num_classes);
}

inline void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
    std::string payload;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        payload += std::to_string(labels[i]);
        payload += '\n';
    }
    detail::write_file_atomic(path, payload);
}

inline void write_trace(const std::filesystem::path& path, const EstimationTrace& trace) {
    std::size_t classes = 0;
    for (const auto& record : trace.records)
        if (record.estimate) {
            classes = record.estimate->size();
            break;
        }
    std::string payload = "iteration,objective,max_change";
    for (std::size_t k = 0; k < classes; ++k) payload += ",p" + std::to_string(k);
    payload += '\n';
    for (const auto& record : trace.records) {
        payload += std::to_string(record.iteration);
        payload += ',';
        payload += format_value(record.objective);
        payload += ',';
        payload += format_value(record.max_change);
        for (std::size_t k = 0; k < classes; ++k) {
            payload += ',';
            if (record.estimate) payload += format_value((*record.estimate)[k]);
        }
        payload += '\n';
    }
    payload += "# termination ";
    payload += trace.termination == Termination::converged ? "converged" : "max-iterations";
    payload += '\n';
    detail::write_file_atomic(path, payload);
}

inline EstimationTrace read_trace(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    EstimationTrace trace;
    std::size_t classes = 0;
    bool saw_header = false;
    bool saw_termination = false;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        auto [content, col0] = detail::trim(lines[n]);
        (void)col0;
        if (content.empty()) continue;
        if (content.starts_with("#")) {
            auto [tail, tcol] = detail::trim(content.substr(1));
            (void)tcol;
            if (tail.starts_with("termination")) {
                auto [word, wcol] = detail::trim(tail.substr(std::string_view("termination").size()));
                if (word == "converged")
                    trace.termination = Termination::converged;
                else if (word == "max-iterations")
                    trace.termination = Termination::max_iterations;
                else
                    throw ParseError(n + 1, wcol, "unknown termination reason '" +
                                                      std::string(word) + "'");
                saw_termination = true;
            }
            continue;
        }
        const auto fields = detail::split_csv(content);
        if (!saw_header) {
            saw_header = true;
            if (fields.size() < 3)
                throw ParseError(n + 1, 1, "trace header needs at least 3 columns");
            classes = fields.size() - 3;
            continue;
        }
        if (fields.size() != classes + 3)
            throw ParseError(n + 1, 1,
                             "expected " + std::to_string(classes + 3) + " columns, got " +
                                 std::to_string(fields.size()));
        TraceRecord record;
        {
            auto [token, col] = detail::trim(fields[0]);
            record.iteration = detail::parse_index(token, n + 1, col);
        }
        {
            auto [token, col] = detail::trim(fields[1]);
            record.objective = detail::parse_value(token, n + 1, col);
        }
        {
            auto [token, col] = detail::trim(fields[2]);
            record.max_change = detail::parse_value(token, n + 1, col);
        }
        bool any_estimate = false;
        std::vector<double> estimate(classes);
        for (std::size_t k = 0; k < classes; ++k) {
            auto [token, col] = detail::trim(fields[3 + k]);
            if (token.empty()) continue;
            estimate[k] = detail::parse_value(token, n + 1, col);
            any_estimate = true;
        }
        if (any_estimate) record.estimate = PriorVector::validate(std::move(estimate));
        if (trace.records.empty()) {
            if (record.iteration != 0)
                throw ParseError(n + 1, 1, "trace must start at iteration 0");
        } else if (record.iteration <= trace.records.back().iteration) {
            throw ParseError(n + 1, 1, "iteration indices must strictly increase");
        }
        trace.records.push_back(std::move(record));
    }
    if (!saw_header)
        throw Error(ErrorCode::empty_input, "io: '" + path.string() + "' is not a trace file");
    (void)saw_termination;
    return trace;
}

}  // namespace priorshift
