#pragma once

// Corpus ingestion: delimited-text SNS posts -> PostRecord, plus Table-style
// dataset statistics.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "reintel/error.hpp"
#include "reintel/io.hpp"
#include "reintel/unicode.hpp"

namespace reintel {

struct PostRecord {
    std::string id;
    std::string user_name;
    std::string post_message;
    std::optional<std::int64_t> timestamp_post;
    std::optional<double> num_like_post;
    std::optional<double> num_comment_post;
    std::optional<double> num_share_post;
    std::vector<std::string> images;
    std::optional<int> label; // 0 = reliable, 1 = unreliable

    friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

/// Column names for each record field. An empty `images` or `label` name
/// means the column is not mapped.
struct Schema {
    std::string id = "id";
    std::string user_name = "user_name";
    std::string post_message = "post_message";
    std::string timestamp_post = "timestamp_post";
    std::string num_like_post = "num_like_post";
    std::string num_comment_post = "num_comment_post";
    std::string num_share_post = "num_share_post";
    std::string images = "image_links";
    std::string label = "label";
    char delimiter = ',';
};

struct CorpusStats {
    std::size_t n_examples = 0;
    double avg_message_length = 0.0;
    std::size_t n_with_images = 0;
    std::size_t n_duplicated_posts = 0;
    std::size_t n_duplicated_users = 0;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

// Timestamps outside 1970-01-01 .. 9999-12-31T23:59:59Z load as missing.
inline constexpr std::int64_t kMinTimestamp = 0;
inline constexpr std::int64_t kMaxTimestamp = 253402300799;

namespace csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based line where the row starts
};

/// RFC 4180 style reader: quoted fields, doubled quotes, embedded newlines,
/// CRLF or LF line endings. A leading UTF-8 BOM is skipped. Blank lines are
/// ignored.
inline std::vector<Row> parse(std::string_view text, char delim) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    std::size_t line = 1;
    row.line = 1;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_quoted = false;
    };
    auto end_row = [&](std::size_t next_line) {
        end_field();
        const bool blank = row.fields.size() == 1 && row.fields[0].empty();
        if (!blank) rows.push_back(std::move(row));
        row = Row{};
        row.line = next_line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_quoted) {
            in_quotes = true;
            field_quoted = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            continue;
        } else if (c == '\n') {
            ++line;
            end_row(line);
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes)
        throw Error("corpus", ErrorKind::MalformedCsv,
                    "unterminated quoted field in row starting at line " + std::to_string(row.line));
    if (!field.empty() || field_quoted || !row.fields.empty()) end_row(line);
    return rows;
}

inline std::string quote(std::string_view value, char delim) {
    const bool needs = value.find_first_of(std::string{'"', '\n', '\r', delim}) != std::string_view::npos ||
                       (!value.empty() && (value.front() == ' ' || value.back() == ' '));
    if (!needs) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace csv

namespace detail {

inline std::optional<double> parse_count(std::string_view cell) {
    auto v = io::parse_double(cell);
    if (!v || !std::isfinite(*v) || *v < 0.0) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_timestamp(std::string_view cell) {
    std::optional<std::int64_t> ts = io::parse_int(cell);
    if (!ts) {
        auto d = io::parse_double(cell);
        if (!d || !std::isfinite(*d) || std::floor(*d) != *d) return std::nullopt;
        if (*d < static_cast<double>(kMinTimestamp) || *d > static_cast<double>(kMaxTimestamp)) return std::nullopt;
        ts = static_cast<std::int64_t>(*d);
    }
    if (*ts < kMinTimestamp || *ts > kMaxTimestamp) return std::nullopt;
    return ts;
}

inline std::string_view strip_quotes(std::string_view s) {
    s = io::trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
        s = s.substr(1, s.size() - 2);
    return io::trim(s);
}

} // namespace detail

/// Accepts a list literal (`['a', 'b']`), a semicolon-joined list, or a
/// single URL. Empty items are dropped.
inline std::vector<std::string> parse_images(std::string_view cell) {
    std::vector<std::string> out;
    auto s = io::trim(cell);
    if (s.empty()) return out;
    std::vector<std::string> parts;
    if (s.front() == '[' && s.back() == ']') {
        parts = io::split(s.substr(1, s.size() - 2), ',');
    } else {
        parts = io::split(s, ';');
    }
    for (const auto& p : parts) {
        auto item = detail::strip_quotes(p);
        if (!item.empty()) out.emplace_back(item);
    }
    return out;
}

/// Parses corpus text. `source` only labels error messages.
inline std::vector<PostRecord> parse_corpus(std::string_view text, const Schema& schema, bool has_labels,
                                            std::string_view source = "<memory>") {
    auto rows = csv::parse(text, schema.delimiter);
    if (rows.empty())
        throw Error("corpus", ErrorKind::MalformedCsv, std::string(source) + ": missing header row");

    const auto& header = rows.front().fields;
    auto find_column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
        if (name.empty()) {
            if (required) throw Error("corpus", ErrorKind::MissingColumn, "required column mapping is empty");
            return std::nullopt;
        }
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (io::trim(header[i]) == name) return i;
        }
        throw Error("corpus", ErrorKind::MissingColumn,
                    std::string(source) + ": mapped column '" + name + "' not in header");
    };

    const std::size_t c_id = *find_column(schema.id, true);
    const std::size_t c_user = *find_column(schema.user_name, true);
    const std::size_t c_msg = *find_column(schema.post_message, true);
    const std::size_t c_ts = *find_column(schema.timestamp_post, true);
    const std::size_t c_like = *find_column(schema.num_like_post, true);
    const std::size_t c_comment = *find_column(schema.num_comment_post, true);
    const std::size_t c_share = *find_column(schema.num_share_post, true);
    const auto c_images = find_column(schema.images, false);
    const auto c_label = has_labels ? find_column(schema.label, true) : std::nullopt;

    std::vector<PostRecord> records;
    records.reserve(rows.size() - 1);
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const std::string where =
            std::string(source) + " row " + std::to_string(r) + " (line " + std::to_string(rows[r].line) + ")";
        if (f.size() != header.size())
            throw Error("corpus", ErrorKind::MalformedCsv,
                        where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(f.size()));
        PostRecord rec;
        rec.id = std::string(io::trim(f[c_id]));
        if (rec.id.empty()) throw Error("corpus", ErrorKind::EmptyId, where + ": empty id");
        if (!seen.insert(rec.id).second)
            throw Error("corpus", ErrorKind::DuplicateId, where + ": duplicate id '" + rec.id + "'");
        rec.user_name = f[c_user];
        rec.post_message = f[c_msg];
        rec.timestamp_post = detail::parse_timestamp(f[c_ts]);
        rec.num_like_post = detail::parse_count(f[c_like]);
        rec.num_comment_post = detail::parse_count(f[c_comment]);
        rec.num_share_post = detail::parse_count(f[c_share]);
        if (c_images) rec.images = parse_images(f[*c_images]);
        if (c_label) {
            auto v = io::parse_double(f[*c_label]);
            if (!v || (*v != 0.0 && *v != 1.0))
                throw Error("corpus", ErrorKind::BadLabel,
                            where + ": label '" + f[*c_label] + "' is not 0 or 1");
            rec.label = static_cast<int>(*v);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::vector<PostRecord> load_corpus(const std::filesystem::path& path, const Schema& schema,
                                           bool has_labels) {
    if (!std::filesystem::is_regular_file(path))
        throw Error("corpus", ErrorKind::MissingFile, "corpus file '" + path.string() + "' does not exist");
    const std::string text = io::read_file(path, "corpus");
    return parse_corpus(text, schema, has_labels, path.string());
}

/// Renders records with the schema's column names. Missing values become
/// empty cells, images are semicolon-joined, labels are written only when
/// `with_labels` is set.
inline std::string write_corpus(const std::vector<PostRecord>& records, const Schema& schema, bool with_labels) {
    const char d = schema.delimiter;
    std::string out;
    auto cell = [&](std::string_view v, bool last) {
        out += csv::quote(v, d);
        out.push_back(last ? '\n' : d);
    };
    auto count = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string{}; };

    const bool images = !schema.images.empty();
    const bool labels = with_labels && !schema.label.empty();
    cell(schema.id, false);
    cell(schema.user_name, false);
    cell(schema.post_message, false);
    cell(schema.timestamp_post, false);
    cell(schema.num_like_post, false);
    cell(schema.num_comment_post, false);
    cell(schema.num_share_post, !images && !labels);
    if (images) cell(schema.images, !labels);
    if (labels) cell(schema.label, true);

    for (const auto& r : records) {
        cell(r.id, false);
        cell(r.user_name, false);
        cell(r.post_message, false);
        cell(r.timestamp_post ? std::to_string(*r.timestamp_post) : std::string{}, false);
        cell(count(r.num_like_post), false);
        cell(count(r.num_comment_post), false);
        cell(count(r.num_share_post), !images && !labels);
        if (images) {
            std::string joined;
            for (std::size_t i = 0; i < r.images.size(); ++i) {
                if (i) joined.push_back(';');
                joined += r.images[i];
            }
            cell(joined, !labels);
        }
        if (labels) cell(r.label ? std::to_string(*r.label) : std::string{}, true);
    }
    return out;
}

/// Duplicate counts are group members: every record whose message (or user)
/// occurs at least twice is counted, including the first occurrence.
inline CorpusStats compute_stats(const std::vector<PostRecord>& corpus) {
    if (corpus.empty()) throw Error("corpus", ErrorKind::EmptyCorpus, "cannot compute statistics of an empty corpus");
    std::unordered_map<std::string_view, std::size_t> messages;
    std::unordered_map<std::string_view, std::size_t> users;
    CorpusStats s;
    s.n_examples = corpus.size();
    double total_len = 0.0;
    for (const auto& r : corpus) {
        total_len += static_cast<double>(unicode::length(r.post_message));
        if (!r.images.empty()) ++s.n_with_images;
        ++messages[r.post_message];
        ++users[r.user_name];
    }
    s.avg_message_length = total_len / static_cast<double>(corpus.size());
    for (const auto& r : corpus) {
        if (messages[r.post_message] >= 2) ++s.n_duplicated_posts;
        if (users[r.user_name] >= 2) ++s.n_duplicated_users;
    }
    return s;
}

inline std::string format_stats_table(const CorpusStats& s) {
    std::ostringstream os;
    auto line = [&](std::string_view label, const std::string& value) {
        os << label;
        for (std::size_t i = label.size(); i < 30; ++i) os << ' ';
        os << value << '\n';
    };
    line("number of examples", std::to_string(s.n_examples));
    line("average of posts length", io::format_fixed(s.avg_message_length, 2));
    line("number of posts have images", std::to_string(s.n_with_images));
    line("number of duplicated posts", std::to_string(s.n_duplicated_posts));
    line("number of duplicated users", std::to_string(s.n_duplicated_users));
    return os.str();
}

inline std::string format_stats_kv(const CorpusStats& s) {
    std::ostringstream os;
    os << "n_examples=" << s.n_examples << '\n'
       << "avg_message_length=" << io::format_double(s.avg_message_length) << '\n'
       << "n_with_images=" << s.n_with_images << '\n'
       << "n_duplicated_posts=" << s.n_duplicated_posts << '\n'
       << "n_duplicated_users=" << s.n_duplicated_users << '\n';
    return os.str();
}

} // namespace reintel
