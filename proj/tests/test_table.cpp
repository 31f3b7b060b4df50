// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>

#include "kgrerank/error.hpp"
#include "kgrerank/table.hpp"

using namespace kgrerank;

namespace {

Table tsv(const std::string& text) {
    std::istringstream in(text);
    return read_tsv(in, "test.tsv");
}

Table csv(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in, "test.csv");
}

std::size_t error_line(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e.line();
    }
    return SIZE_MAX;
}

}  // namespace

TEST(Tsv, ParsesRowsAndColumns) {
    const Table t = tsv("\xEF\xBB\xBFuser\titem\r\nu1\ta\n\nu2\t\n");
    EXPECT_EQ(t.header, (std::vector<std::string>{"user", "item"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1], (std::vector<std::string>{"u2", ""}));
    EXPECT_EQ(t.lines, (std::vector<std::size_t>{2, 4}));
    EXPECT_EQ(t.column("item"), 1u);
    EXPECT_TRUE(t.has_column("user"));
    EXPECT_FALSE(t.has_column("count"));
    EXPECT_THROW(t.column("count"), ParseError);
}

TEST(Tsv, FieldCountAndEmptyFileErrors) {
    EXPECT_EQ(error_line([] { tsv("a\tb\n1\t2\n1\n"); }), 3u);
    EXPECT_EQ(error_line([] { tsv("a\tb\n1\t2\t3\n"); }), 2u);
    EXPECT_EQ(error_line([] { tsv(""); }), 0u);
}

TEST(Csv, QuotingAndMultilineFields) {
    const Table t = csv("id,text,n\n1,\"hello, world\",2\n2,\"she said \"\"hi\"\"\",3\n3,\"two\nlines\",4\n4,,5\n");
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_EQ(t.rows[0][1], "hello, world");
    EXPECT_EQ(t.rows[1][1], "she said \"hi\"");
    EXPECT_EQ(t.rows[2][1], "two\nlines");
    EXPECT_EQ(t.rows[3][1], "");
    EXPECT_EQ(t.lines, (std::vector<std::size_t>{2, 3, 4, 6}));
}

TEST(Csv, MalformedInput) {
    EXPECT_EQ(error_line([] { csv("a,b\n1,\"open\n"); }), 2u);
    EXPECT_EQ(error_line([] { csv("a,b\n1,x\"y\n"); }), 2u);
    EXPECT_EQ(error_line([] { csv("a,b\n1,\"x\"y\n"); }), 2u);
    EXPECT_EQ(error_line([] { csv("a,b\n1,2,3\n"); }), 2u);
}

TEST(Csv, WriteReadRoundTrip) {
    std::mt19937_64 rng(4);
    const std::string alphabet = "ab,\"\n x";
    std::uniform_int_distribution<std::size_t> len(0, 6), pick(0, alphabet.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        Table t;
        t.header = {"k", "v", "w"};
        for (int r = 0; r < 5; ++r) {
            std::vector<std::string> row;
            for (int c = 0; c < 3; ++c) {
                std::string s;
                const std::size_t n = len(rng);
                for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
                row.push_back(s);
            }
            // An all-empty single-field line would read as blank; keep the key non-empty.
            row[0] = "k" + row[0];
            t.rows.push_back(row);
        }
        std::ostringstream out;
        write_csv(out, t);
        const Table back = csv(out.str());
        EXPECT_EQ(back.header, t.header);
        EXPECT_EQ(back.rows, t.rows);
    }
}

TEST(Tsv, WriteRejectsTabs) {
    Table t;
    t.header = {"a"};
    t.rows = {{"x\ty"}};
    std::ostringstream out;
    EXPECT_THROW(write_tsv(out, t), Error);
    t.rows = {{"xy"}};
    out.str("");
    write_tsv(out, t);
    EXPECT_EQ(out.str(), "a\nxy\n");
}
