#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Minimal RFC 4180 reader/writer shared by the file formats of every module.
namespace syncnet::csv {

// Splits one physical line into fields. Quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported. Returns nullopt on an
// unterminated quote.
std::optional<std::vector<std::string>> split_line(std::string_view line);

// Quotes the field only when needed.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Header-indexed table reader.
class Reader {
public:
    // Reads the header line. Throws ParseError if the stream is empty or the
    // header lacks one of `required` columns.
    Reader(std::istream& in, const std::vector<std::string>& required, std::string source_name);

    // Next non-blank data row; nullopt at end of stream. Rows with the wrong
    // field count come back with `ok == false`.
    struct Row {
        std::vector<std::string> fields;
        std::size_t line_no = 0;
        bool ok = true;
    };
    std::optional<Row> next();

    bool has_column(const std::string& name) const { return index_.contains(name); }
    const std::string& get(const Row& row, const std::string& column) const;
    const std::string& source() const { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t line_no_ = 0;
};

// Shortest text that parses back to the same double.
std::string format_double(double v);

// Parses a whole field as double / signed integer; nullopt on trailing junk.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

} // namespace syncnet::csv
