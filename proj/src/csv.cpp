#include "lcw/csv.hpp"

#include "lcw/error.hpp"

namespace lcw::csv {

std::vector<Record> parse(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<Record> records;
    Row row;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_record = [&] {
        end_cell();
        // a line holding nothing at all is skipped
        if (!(row.size() == 1 && row.front().empty())) records.push_back({record_line, std::move(row)});
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                cell += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (cell_started || !cell.empty()) throw Error(ErrorCode::InvalidArgument, "stray quote in unquoted field", line);
            in_quotes = true;
            cell_started = true;
            break;
        case ',':
            end_cell();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') break;
            cell += c;
            break;
        case '\n':
            end_record();
            ++line;
            record_line = line;
            break;
        default:
            cell += c;
        }
    }
    if (in_quotes) throw Error(ErrorCode::InvalidArgument, "unterminated quoted field", record_line);
    if (!cell.empty() || cell_started || !row.empty()) end_record();
    return records;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void append_row(std::string& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    out += '\n';
}

Header::Header(const Row& names) : names_(names) {}

std::optional<std::size_t> Header::find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

std::size_t Header::require(std::string_view name) const {
    if (auto idx = find(name)) return *idx;
    throw Error(ErrorCode::InvalidArgument, "missing column '" + std::string(name) + "'", 1);
}

std::string_view field(const Row& row, std::size_t index) {
    return index < row.size() ? std::string_view(row[index]) : std::string_view{};
}

}  // namespace lcw::csv
