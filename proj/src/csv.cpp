#include "syncnet/csv.hpp"

#include "syncnet/error.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

namespace syncnet::csv {

std::optional<std::vector<std::string>> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (in_quotes) return std::nullopt;
    fields.push_back(std::move(cur));
    return fields;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

Reader::Reader(std::istream& in, const std::vector<std::string>& required, std::string source_name)
    : in_(in), source_(std::move(source_name)) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
        line.clear();
    }
    if (line.empty()) throw ParseError(source_ + ": missing CSV header");
    auto header = split_line(line);
    if (!header) throw ParseError(source_ + ": malformed CSV header");
    header_ = std::move(*header);
    for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
    for (const auto& col : required) {
        if (!index_.contains(col)) throw ParseError(source_ + ": CSV header lacks column '" + col + "'");
    }
}

std::optional<Reader::Row> Reader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Row row;
        row.line_no = line_no_;
        auto fields = split_line(line);
        if (!fields || fields->size() != header_.size()) {
            row.ok = false;
        } else {
            row.fields = std::move(*fields);
        }
        return row;
    }
    return std::nullopt;
}

const std::string& Reader::get(const Row& row, const std::string& column) const {
    return row.fields.at(index_.at(column));
}

std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size()) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

} // namespace syncnet::csv
