// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/table.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "kgrerank/error.hpp"

namespace kgrerank {
namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

void strip_bom(std::string& line) {
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
}

void add_row(Table& t, std::vector<std::string> fields, std::size_t line) {
    if (t.header.empty()) {
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) {
            throw ParseError(t.source, line, "missing header row");
        }
        t.header = std::move(fields);
        return;
    }
    if (fields.size() != t.header.size()) {
        throw ParseError(t.source, line,
                         fmt::format("expected {} fields, found {}", t.header.size(), fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(line);
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(source, 1, fmt::format("missing column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(std::string_view name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

Table read_tsv(std::istream& in, std::string source) {
    Table t;
    t.source = std::move(source);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (lineno == 1) strip_bom(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        add_row(t, std::move(fields), lineno);
    }
    if (t.header.empty()) throw ParseError(t.source, 0, "empty file (no header row)");
    return t;
}

Table read_csv(std::istream& in, std::string source) {
    Table t;
    t.source = std::move(source);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (lineno == 1) strip_bom(line);
        if (line.empty()) continue;
        const std::size_t start_line = lineno;
        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        bool was_quoted = false;
        std::size_t i = 0;
        while (true) {
            if (i == line.size()) {
                if (!quoted) break;
                // Quoted field continues on the next physical line.
                std::string next;
                if (!std::getline(in, next)) throw ParseError(t.source, start_line, "unterminated quoted field");
                ++lineno;
                strip_cr(next);
                field += '\n';
                line = std::move(next);
                i = 0;
                continue;
            }
            const char c = line[i++];
            if (quoted) {
                if (c == '"') {
                    if (i < line.size() && line[i] == '"') {
                        field += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field += c;
                }
            } else if (c == '"') {
                if (!field.empty() || was_quoted) throw ParseError(t.source, lineno, "stray quote inside field");
                quoted = true;
                was_quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else {
                if (was_quoted) throw ParseError(t.source, lineno, "text after closing quote");
                field += c;
            }
        }
        fields.push_back(std::move(field));
        add_row(t, std::move(fields), start_line);
    }
    if (t.header.empty()) throw ParseError(t.source, 0, "empty file (no header row)");
    return t;
}

Table read_tsv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
    return read_tsv(in, path.string());
}

Table read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
    return read_csv(in, path.string());
}

void write_tsv(std::ostream& out, const Table& t) {
    auto row = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i].find_first_of("\t\n\r") != std::string::npos) {
                throw Error(fmt::format("TSV field '{}' contains a tab or line break", fields[i]));
            }
            out << (i ? "\t" : "") << fields[i];
        }
        out << '\n';
    };
    row(t.header);
    for (const auto& r : t.rows) row(r);
}

void write_csv(std::ostream& out, const Table& t) {
    auto row = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_quote(fields[i]);
        out << '\n';
    };
    row(t.header);
    for (const auto& r : t.rows) row(r);
}

}  // namespace kgrerank
