#pragma once

// Long-format meter CSV: header `day,slot,channel,value`, 1-based day and
// slot, an empty value field for a missing reading.

#include <lrtc/data.hpp>
#include <lrtc/errors.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace lrtc {

inline constexpr std::string_view csv_header = "day,slot,channel,value";

/// Shortest decimal text that parses back to exactly `v`.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

[[nodiscard]] inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

[[nodiscard]] inline std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r')
        s.remove_suffix(1);
    return s;
}

template <class T>
[[nodiscard]] bool parse_number(std::string_view text, T &out) {
    if (text.empty())
        return false;
    if (text.front() == '+')
        text.remove_prefix(1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

} // namespace detail

[[nodiscard]] inline std::vector<MeterRecord> read_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("line 1: empty file, expected header '" +
                        std::string(csv_header) + "'");
    if (detail::trim_cr(line) != csv_header)
        throw DataError("line 1: header '" + std::string(detail::trim_cr(line)) +
                        "' does not match '" + std::string(csv_header) + "'");
    std::vector<MeterRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view row = detail::trim_cr(line);
        if (row.empty())
            continue;
        const auto fields = detail::split_commas(row);
        const auto where  = "line " + std::to_string(lineno) + ": ";
        if (fields.size() != 4)
            throw DataError(where + "expected 4 fields, got " +
                            std::to_string(fields.size()));
        MeterRecord r;
        if (!detail::parse_number(fields[0], r.day) || r.day < 1)
            throw DataError(where + "day must be a positive integer");
        if (!detail::parse_number(fields[1], r.slot) || r.slot < 1)
            throw DataError(where + "slot must be a positive integer");
        if (fields[2].empty())
            throw DataError(where + "empty channel");
        r.channel = std::string(fields[2]);
        if (!fields[3].empty()) {
            double v = 0.0;
            if (!detail::parse_number(fields[3], v) || !std::isfinite(v))
                throw DataError(where + "value '" + std::string(fields[3]) +
                                "' is not a finite number");
            r.value = v;
        }
        records.push_back(std::move(r));
    }
    return records;
}

[[nodiscard]] inline std::vector<MeterRecord> load_csv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    try {
        return read_csv(in);
    } catch (const DataError &e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_records(const std::vector<MeterRecord> &records, std::ostream &out) {
    out << csv_header << '\n';
    for (const auto &r : records) {
        out << r.day << ',' << r.slot << ',' << r.channel << ',';
        if (r.value)
            out << format_double(*r.value);
        out << '\n';
    }
}

inline void write_csv(const TensorDataset &ds, std::ostream &out) {
    write_records(to_records(ds), out);
}

/// Writes the dataset, observed entries only; unobserved values are empty.
inline void save_csv(const TensorDataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    write_csv(ds, out);
    if (!out)
        throw DataError("write to '" + path + "' failed");
}

} // namespace lrtc
