#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Minimal RFC 4180 reader/writer: comma separated, double-quote quoting,
// "\n" record terminator on output, "\n" or "\r\n" accepted on input.
namespace lcw::csv {

using Row = std::vector<std::string>;

struct Record {
    std::size_t line;  // 1-based line where the record starts
    Row fields;
};

/// Throws Error(InvalidArgument) on an unterminated quoted field.
std::vector<Record> parse(std::string_view text);

std::string escape(std::string_view field);
void append_row(std::string& out, std::span<const std::string> fields);

/// Column lookup by header name.
class Header {
public:
    explicit Header(const Row& names);

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws Error(InvalidArgument) naming the missing column.
    std::size_t require(std::string_view name) const;

private:
    Row names_;
};

/// Field `index` of `row`, or "" when the row is short.
std::string_view field(const Row& row, std::size_t index);

}  // namespace lcw::csv
