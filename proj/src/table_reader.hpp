#pragma once

#include "georef/text.hpp"

#include <optional>
#include <string>
#include <vector>

namespace georef::detail {

/// Delimited-table reader: RFC 4180 quoting for ',' and literal fields
/// otherwise. Blank lines are skipped; Row::line is the physical line.
struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

class TableReader {
public:
    TableReader(std::string data, char delim) : data_(std::move(data)), delim_(delim) {}

    std::optional<Row> next() {
        while (pos_ < data_.size()) {
            Row row{line_, {}};
            if (delim_ == ',') {
                read_quoted_row(row.fields);
            } else {
                read_literal_row(row.fields);
            }
            if (row.fields.size() == 1 && text::trim(row.fields[0]).empty()) continue;
            return row;
        }
        return std::nullopt;
    }

private:
    void read_literal_row(std::vector<std::string>& fields) {
        auto end = data_.find('\n', pos_);
        if (end == std::string::npos) end = data_.size();
        std::string_view line(data_.data() + pos_, end - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fields = text::split(line, delim_);
        pos_ = end + 1;
        ++line_;
    }

    void read_quoted_row(std::vector<std::string>& fields) {
        std::string field;
        bool quoted = false;
        while (pos_ < data_.size()) {
            char c = data_[pos_++];
            if (quoted) {
                if (c == '"') {
                    if (pos_ < data_.size() && data_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == delim_) {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n') {
                ++line_;
                break;
            } else if (c != '\r') {
                field.push_back(c);
            }
        }
        fields.push_back(std::move(field));
    }

    std::string data_;
    char delim_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace georef::detail
