#pragma once

// Minimal UTF-8 codec and simple (1:1) case mapping.
//
// The case tables cover Latin-1, Latin Extended-A/B (the parts with case
// pairs), Latin Extended Additional (every Vietnamese precomposed letter),
// basic Greek and basic Cyrillic. Code points outside these blocks are
// treated as uncased.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace reintel::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8; each invalid or truncated sequence yields one U+FFFD.
/// When `offsets` is given it receives the byte offset of every decoded code
/// point followed by the total byte length.
inline std::u32string decode(std::string_view s, std::vector<std::size_t>* offsets = nullptr) {
    std::u32string out;
    out.reserve(s.size());
    if (offsets) {
        offsets->clear();
        offsets->reserve(s.size() + 1);
    }
    const auto* p = reinterpret_cast<const unsigned char*>(s.data());
    const std::size_t n = s.size();
    std::size_t i = 0;
    auto emit = [&](char32_t cp, std::size_t at) {
        out.push_back(cp);
        if (offsets) offsets->push_back(at);
    };
    while (i < n) {
        const unsigned char b0 = p[i];
        if (b0 < 0x80) {
            emit(b0, i);
            ++i;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; min = 0x80; }
        else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; min = 0x800; }
        else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; min = 0x10000; }
        else {
            emit(kReplacement, i);
            ++i;
            continue;
        }
        if (i + static_cast<std::size_t>(len) > n) {
            emit(kReplacement, i);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const unsigned char b = p[i + static_cast<std::size_t>(k)];
            if ((b & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            emit(kReplacement, i);
            ++i;
            continue;
        }
        emit(cp, i);
        i += static_cast<std::size_t>(len);
    }
    if (offsets) offsets->push_back(n);
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

/// Number of Unicode scalar values in a UTF-8 string.
inline std::size_t length(std::string_view s) { return decode(s).size(); }

constexpr char32_t to_lower(char32_t c) noexcept {
    if (c < 0x80) return (c >= U'A' && c <= U'Z') ? c + 0x20 : c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
    if (c >= 0x100 && c <= 0x12F) return c | 1;
    if (c == 0x130) return U'i';
    if (c >= 0x132 && c <= 0x137) return c | 1;
    if (c >= 0x139 && c <= 0x148) return (c & 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return c | 1;
    if (c == 0x178) return 0xFF;
    if (c >= 0x179 && c <= 0x17E) return (c & 1) ? c + 1 : c;
    switch (c) {
    case 0x1A0: return 0x1A1; // Ơ
    case 0x1AF: return 0x1B0; // Ư
    case 0x1CD: case 0x1CF: case 0x1D1: case 0x1D3: return c + 1;
    case 0x1E9E: return 0xDF;
    default: break;
    }
    if (c >= 0x1E00 && c <= 0x1E95) return c | 1;
    if (c >= 0x1EA0 && c <= 0x1EFF) return c | 1;
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    return c;
}

constexpr char32_t to_upper(char32_t c) noexcept {
    if (c < 0x80) return (c >= U'a' && c <= U'z') ? c - 0x20 : c;
    if (c == 0xDF) return 0x1E9E;
    if (c >= 0xE0 && c <= 0xFE && c != 0xF7) return c - 0x20;
    if (c == 0xFF) return 0x178;
    if (c >= 0x100 && c <= 0x12F) return c & ~char32_t{1};
    if (c == 0x131) return U'I';
    if (c >= 0x132 && c <= 0x137) return c & ~char32_t{1};
    if (c >= 0x139 && c <= 0x148) return (c & 1) ? c : c - 1;
    if (c >= 0x14A && c <= 0x177) return c & ~char32_t{1};
    if (c >= 0x179 && c <= 0x17E) return (c & 1) ? c : c - 1;
    switch (c) {
    case 0x1A1: return 0x1A0;
    case 0x1B0: return 0x1AF;
    case 0x1CE: case 0x1D0: case 0x1D2: case 0x1D4: return c - 1;
    default: break;
    }
    if (c >= 0x1E00 && c <= 0x1E95) return c & ~char32_t{1};
    if (c >= 0x1EA0 && c <= 0x1EFF) return c & ~char32_t{1};
    if (c >= 0x3B1 && c <= 0x3CB && c != 0x3C2) return c - 0x20;
    if (c >= 0x450 && c <= 0x45F) return c - 0x50;
    if (c >= 0x430 && c <= 0x44F) return c - 0x20;
    return c;
}

constexpr bool is_upper(char32_t c) noexcept { return to_lower(c) != c; }
constexpr bool is_lower(char32_t c) noexcept { return to_upper(c) != c; }
constexpr bool is_cased(char32_t c) noexcept { return is_upper(c) || is_lower(c); }

constexpr bool is_space(char32_t c) noexcept {
    switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return c >= 0x2000 && c <= 0x200A;
    }
}

inline std::string lower(std::string_view s) {
    std::u32string cps = decode(s);
    for (char32_t& c : cps) c = to_lower(c);
    return encode(cps);
}

/// Splits on Unicode whitespace; empty tokens are dropped.
inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::u32string cur;
    for (char32_t c : decode(s)) {
        if (is_space(c)) {
            if (!cur.empty()) {
                out.push_back(encode(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(encode(cur));
    return out;
}

} // namespace reintel::unicode
