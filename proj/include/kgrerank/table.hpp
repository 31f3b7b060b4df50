// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kgrerank {

/// A delimited text file with a header row. `lines[i]` is the 1-based source
/// line on which row i starts.
struct Table {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;

    /// Column position by header name; throws ParseError if missing.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

/// Tab-separated, no quoting. Rows with a wrong field count are rejected.
Table read_tsv(std::istream& in, std::string source);
/// RFC 4180: comma-separated, double-quoted fields may span lines and
/// escape quotes by doubling.
Table read_csv(std::istream& in, std::string source);

Table read_tsv_file(const std::filesystem::path& path);
Table read_csv_file(const std::filesystem::path& path);

void write_tsv(std::ostream& out, const Table& t);
void write_csv(std::ostream& out, const Table& t);

}  // namespace kgrerank
