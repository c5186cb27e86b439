// SPDX-License-Identifier: Apache-2.0
#pragma once

// Line-delimited JSON plumbing: a buffered line reader, a single-pass
// scanner for flat objects (the trace/contract schemas are flat, so a full
// DOM parse per line is avoidable), and file digest helpers.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyprobe/errors.hpp"
#include "proxyprobe/keccak.hpp"

namespace proxyprobe {

class LineReader {
  public:
    explicit LineReader(const std::string& path) : file_(std::fopen(path.c_str(), "rb")) {
        if (!file_) throw IoError("cannot open " + path);
        buf_.resize(kChunk);
    }
    ~LineReader() {
        if (file_) std::fclose(file_);
    }
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    // Returns the next line without the terminator; false at EOF.
    bool next(std::string& line) {
        line.clear();
        while (true) {
            while (pos_ < len_) {
                const char c = buf_[pos_++];
                if (c == '\n') {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    ++line_no_;
                    return true;
                }
                line += c;
            }
            len_ = std::fread(buf_.data(), 1, buf_.size(), file_);
            pos_ = 0;
            if (len_ == 0) {
                if (line.empty()) return false;
                if (line.back() == '\r') line.pop_back();
                ++line_no_;
                return true;  // final unterminated line
            }
        }
    }

    uint64_t line_number() const { return line_no_; }

  private:
    static constexpr size_t kChunk = 1 << 20;
    FILE* file_ = nullptr;
    std::vector<char> buf_;
    size_t pos_ = 0;
    size_t len_ = 0;
    uint64_t line_no_ = 0;
};

namespace jsonl {

struct Field {
    std::string_view key;
    std::string_view value;  // raw token text; for strings, without quotes
    bool is_string = false;
    bool is_null = false;
};

namespace detail {

inline void skip_ws(std::string_view s, size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

// Scans a string token body starting after the opening quote; returns the
// index of the closing quote or npos. Escaped content is left raw; schema
// values never need escapes, and raw text fails downstream validation.
inline size_t scan_string(std::string_view s, size_t i) {
    while (i < s.size()) {
        if (s[i] == '\\') {
            i += 2;
            continue;
        }
        if (s[i] == '"') return i;
        ++i;
    }
    return std::string_view::npos;
}

}  // namespace detail

// Single-pass scan of one flat JSON object; nested objects/arrays are
// rejected. Returns false with `err` set on malformed input.
inline bool scan_flat_object(std::string_view line, std::vector<Field>& out, std::string& err) {
    using detail::scan_string;
    using detail::skip_ws;
    out.clear();
    size_t i = 0;
    skip_ws(line, i);
    if (i >= line.size() || line[i] != '{') {
        err = "expected object";
        return false;
    }
    ++i;
    skip_ws(line, i);
    if (i < line.size() && line[i] == '}') return true;  // empty object
    while (true) {
        skip_ws(line, i);
        if (i >= line.size() || line[i] != '"') {
            err = "expected key";
            return false;
        }
        const size_t key_start = ++i;
        const size_t key_end = scan_string(line, i);
        if (key_end == std::string_view::npos) {
            err = "unterminated key";
            return false;
        }
        i = key_end + 1;
        skip_ws(line, i);
        if (i >= line.size() || line[i] != ':') {
            err = "expected colon";
            return false;
        }
        ++i;
        skip_ws(line, i);
        if (i >= line.size()) {
            err = "missing value";
            return false;
        }
        Field f;
        f.key = line.substr(key_start, key_end - key_start);
        if (line[i] == '"') {
            const size_t val_start = ++i;
            const size_t val_end = scan_string(line, i);
            if (val_end == std::string_view::npos) {
                err = "unterminated string";
                return false;
            }
            f.value = line.substr(val_start, val_end - val_start);
            f.is_string = true;
            i = val_end + 1;
        } else if (line[i] == '{' || line[i] == '[') {
            err = "nested values not allowed";
            return false;
        } else {
            const size_t val_start = i;
            while (i < line.size() && line[i] != ',' && line[i] != '}' && line[i] != ' ' &&
                   line[i] != '\t')
                ++i;
            f.value = line.substr(val_start, i - val_start);
            if (f.value.empty()) {
                err = "empty value";
                return false;
            }
            f.is_null = (f.value == "null");
        }
        out.push_back(f);
        skip_ws(line, i);
        if (i >= line.size()) {
            err = "unterminated object";
            return false;
        }
        if (line[i] == ',') {
            ++i;
            continue;
        }
        if (line[i] == '}') {
            ++i;
            skip_ws(line, i);
            if (i != line.size()) {
                err = "trailing content";
                return false;
            }
            return true;
        }
        err = "expected ',' or '}'";
        return false;
    }
}

inline void append_json_string(std::string& out, std::string_view value) {
    out += '"';
    for (const char c : value) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace jsonl

// Buffered whole-file writer with deterministic content.
class FileWriter {
  public:
    explicit FileWriter(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) throw IoError("cannot open for write: " + path);
        buf_.reserve(kFlushAt + 4096);
    }
    ~FileWriter() {
        if (file_) {
            flush();
            std::fclose(file_);
        }
    }
    FileWriter(const FileWriter&) = delete;
    FileWriter& operator=(const FileWriter&) = delete;

    void write(std::string_view text) {
        buf_.append(text);
        if (buf_.size() >= kFlushAt) flush();
    }

    void close() {
        flush();
        if (std::fclose(file_) != 0) {
            file_ = nullptr;
            throw IoError("write failed: " + path_);
        }
        file_ = nullptr;
    }

  private:
    void flush() {
        if (buf_.empty()) return;
        if (std::fwrite(buf_.data(), 1, buf_.size(), file_) != buf_.size())
            throw IoError("write failed: " + path_);
        buf_.clear();
    }

    static constexpr size_t kFlushAt = 1 << 20;
    std::string path_;
    FILE* file_ = nullptr;
    std::string buf_;
};

inline Digest32 file_digest(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open " + path);
    Keccak256 hasher;
    std::vector<uint8_t> buf(1 << 20);
    size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) hasher.update(buf.data(), n);
    std::fclose(f);
    return hasher.finish();
}

inline std::string read_file(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open " + path);
    std::string out;
    char buf[1 << 16];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
    std::fclose(f);
    return out;
}

inline void write_file(const std::string& path, std::string_view content) {
    FileWriter w(path);
    w.write(content);
    w.close();
}

}  // namespace proxyprobe
