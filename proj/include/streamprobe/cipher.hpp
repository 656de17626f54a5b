#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "streamprobe/errors.hpp"

namespace streamprobe::cipher {

enum class Kind {
    kAsciiDecimal,
    kFibonacciIndex,
    kPolybius,
    kAdjacentSwap,
    kSubstitution,
};

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::kAsciiDecimal: return "ascii_decimal";
        case Kind::kFibonacciIndex: return "fibonacci_index";
        case Kind::kPolybius: return "polybius";
        case Kind::kAdjacentSwap: return "adjacent_swap";
        case Kind::kSubstitution: return "substitution";
    }
    return "?";
}

inline Kind kind_from_name(const std::string& name) {
    for (Kind k : {Kind::kAsciiDecimal, Kind::kFibonacciIndex, Kind::kPolybius,
                   Kind::kAdjacentSwap, Kind::kSubstitution}) {
        if (name == kind_name(k)) return k;
    }
    throw invalid_input_error("unknown cipher kind '" + name + "'");
}

// Frozen mapping constants. Both tables were produced once by a SplitMix64
// Fisher-Yates shuffle (seed 50 for the substitution alphabet, seed 42 for
// the 25-letter grid with the h/e/l/o cells then pinned) and are shipped as
// literals so every build agrees byte for byte.
inline constexpr std::string_view kDefaultSubstitutionTable = "zkjsvxwnutehdyclfogqamiprb";
inline constexpr std::string_view kDefaultPolybiusGrid = "vdweqtbifalhmoysgpkcznxur";

struct Scheme {
    Kind kind = Kind::kAsciiDecimal;
    std::string name;
    std::string polybius_grid{kDefaultPolybiusGrid};      // 25 letters, i/j merged
    std::string substitution_table{kDefaultSubstitutionTable};  // a..z -> table[i]

    void validate() const {
        if (kind == Kind::kPolybius) {
            if (polybius_grid.size() != 25) throw config_error("polybius grid must have 25 letters");
            std::string sorted = polybius_grid;
            std::sort(sorted.begin(), sorted.end());
            if (sorted != "abcdefghiklmnopqrstuvwxyz") {
                throw config_error("polybius grid must contain each merged letter exactly once");
            }
        }
        if (kind == Kind::kSubstitution) {
            if (substitution_table.size() != 26) {
                throw config_error("substitution table must have 26 letters");
            }
            std::string sorted = substitution_table;
            std::sort(sorted.begin(), sorted.end());
            if (sorted != "abcdefghijklmnopqrstuvwxyz") {
                throw config_error("substitution table must be a bijection on a..z");
            }
        }
    }
};

inline Scheme scheme_by_name(const std::string& name) {
    Scheme s;
    s.name = name;
    if (name == "ascii_decimal") {
        s.kind = Kind::kAsciiDecimal;
    } else if (name == "fibonacci_index") {
        s.kind = Kind::kFibonacciIndex;
    } else if (name == "polybius") {
        s.kind = Kind::kPolybius;
    } else if (name == "adjacent_swap") {
        s.kind = Kind::kAdjacentSwap;
    } else if (name == "WALNUT50" || name == "substitution") {
        s.kind = Kind::kSubstitution;
        s.name = "WALNUT50";
    } else {
        throw invalid_input_error("unknown cipher scheme '" + name + "'");
    }
    return s;
}

namespace detail {

// ASCII-only lowercasing; full Unicode case folding is out of scope.
inline char32_t to_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

inline bool is_ascii_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f';
}

// Minimal UTF-8 <-> code point conversion; invalid bytes are passed through
// as replacement-free single code units so total functions stay total.
inline std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        char32_t cp = 0;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6 && i + 1 < text.size()) {
            cp = (c & 0x1F) << 6 | (static_cast<unsigned char>(text[i + 1]) & 0x3F);
            len = 2;
        } else if ((c >> 4) == 0xE && i + 2 < text.size()) {
            cp = (c & 0x0F) << 12 | (static_cast<unsigned char>(text[i + 1]) & 0x3F) << 6 |
                 (static_cast<unsigned char>(text[i + 2]) & 0x3F);
            len = 3;
        } else if ((c >> 3) == 0x1E && i + 3 < text.size()) {
            cp = (c & 0x07) << 18 | (static_cast<unsigned char>(text[i + 1]) & 0x3F) << 12 |
                 (static_cast<unsigned char>(text[i + 2]) & 0x3F) << 6 |
                 (static_cast<unsigned char>(text[i + 3]) & 0x3F);
            len = 4;
        } else {
            cp = c;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

inline std::string encode_utf8(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

// Word-level permutation from Fibonacci-indexed positions: unique Fibonacci
// values below n in generation order (0,1,2,3,5,...), reversed, then the
// remaining positions ascending. output[i] = input[perm[i]].
inline std::vector<std::size_t> fibonacci_permutation(std::size_t n) {
    std::vector<std::size_t> fib;
    std::uint64_t a = 0, b = 1;
    while (a < n) {
        if (fib.empty() || fib.back() != a) fib.push_back(static_cast<std::size_t>(a));
        const std::uint64_t next = a + b;
        a = b;
        b = next;
    }
    std::vector<bool> used(n, false);
    for (std::size_t v : fib) used[v] = true;
    std::vector<std::size_t> perm(fib.rbegin(), fib.rend());
    for (std::size_t i = 0; i < n; ++i) {
        if (!used[i]) perm.push_back(i);
    }
    return perm;
}

// Applies fn to each maximal non-whitespace run; whitespace runs pass
// through verbatim.
template <typename Fn>
std::u32string map_words(const std::u32string& text, Fn&& fn) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_ascii_space(text[i])) {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !is_ascii_space(text[j])) ++j;
        out += fn(text.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

inline std::string encode(const Scheme& scheme, std::string_view text) {
    scheme.validate();
    const std::u32string cps = detail::decode_utf8(text);
    switch (scheme.kind) {
        case Kind::kAsciiDecimal: {
            std::string out;
            for (std::size_t i = 0; i < cps.size(); ++i) {
                if (i > 0) out += '_';
                out += std::to_string(static_cast<std::uint32_t>(detail::to_lower(cps[i])));
            }
            return out;
        }
        case Kind::kFibonacciIndex: {
            const std::u32string mapped =
                detail::map_words(cps, [](std::u32string word) {
                    const auto perm = detail::fibonacci_permutation(word.size());
                    std::u32string out(word.size(), U' ');
                    for (std::size_t i = 0; i < word.size(); ++i) out[i] = word[perm[i]];
                    return out;
                });
            return detail::encode_utf8(mapped);
        }
        case Kind::kPolybius: {
            std::string out;
            for (char32_t raw : cps) {
                const char32_t c = detail::to_lower(raw);
                if (c == U'[' || c == U']') {
                    throw invalid_input_error("polybius: brackets are reserved escape delimiters");
                }
                if (c == U' ') {
                    out += "00";
                } else if (c >= U'0' && c <= U'9') {
                    out += '9';
                    out += static_cast<char>(c);
                } else if (c >= U'a' && c <= U'z') {
                    const char letter = (c == U'j') ? 'i' : static_cast<char>(c);
                    const std::size_t idx = scheme.polybius_grid.find(letter);
                    out += static_cast<char>('1' + idx / 5);
                    out += static_cast<char>('1' + idx % 5);
                } else {
                    out += '[';
                    detail::append_utf8(out, c);
                    out += ']';
                }
            }
            return out;
        }
        case Kind::kAdjacentSwap: {
            const std::u32string mapped = detail::map_words(cps, [](std::u32string word) {
                for (std::size_t i = 0; i + 1 < word.size(); i += 2) std::swap(word[i], word[i + 1]);
                return word;
            });
            return detail::encode_utf8(mapped);
        }
        case Kind::kSubstitution: {
            std::u32string out;
            out.reserve(cps.size());
            for (char32_t raw : cps) {
                const char32_t c = detail::to_lower(raw);
                out.push_back((c >= U'a' && c <= U'z')
                                  ? static_cast<char32_t>(scheme.substitution_table[c - U'a'])
                                  : c);
            }
            return detail::encode_utf8(out);
        }
    }
    throw invalid_input_error("encode: unknown cipher kind");
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

inline std::string decode(const Scheme& scheme, std::string_view ciphertext) {
    scheme.validate();
    switch (scheme.kind) {
        case Kind::kAsciiDecimal: {
            if (ciphertext.empty()) return "";
            std::u32string out;
            std::size_t start = 0, token_index = 0;
            while (start <= ciphertext.size()) {
                std::size_t end = ciphertext.find('_', start);
                if (end == std::string_view::npos) end = ciphertext.size();
                const std::string_view tok = ciphertext.substr(start, end - start);
                if (tok.empty() || tok.find_first_not_of("0123456789") != std::string_view::npos) {
                    throw decode_error("ascii_decimal: malformed token " +
                                       std::to_string(token_index) + " '" + std::string(tok) + "'");
                }
                unsigned long long v = 0;
                for (char c : tok) {
                    v = v * 10 + static_cast<unsigned long long>(c - '0');
                    if (v > 0x10FFFF) {
                        throw decode_error("ascii_decimal: code point out of range at token " +
                                           std::to_string(token_index));
                    }
                }
                out.push_back(static_cast<char32_t>(v));
                ++token_index;
                if (end == ciphertext.size()) break;
                start = end + 1;
            }
            return detail::encode_utf8(out);
        }
        case Kind::kFibonacciIndex: {
            const std::u32string cps = detail::decode_utf8(ciphertext);
            const std::u32string mapped = detail::map_words(cps, [](std::u32string word) {
                const auto perm = detail::fibonacci_permutation(word.size());
                std::u32string out(word.size(), U' ');
                for (std::size_t i = 0; i < word.size(); ++i) out[perm[i]] = word[i];
                return out;
            });
            return detail::encode_utf8(mapped);
        }
        case Kind::kPolybius: {
            std::string out;
            std::size_t i = 0;
            while (i < ciphertext.size()) {
                const char c = ciphertext[i];
                if (c == '[') {
                    const std::size_t close = ciphertext.find(']', i + 1);
                    if (close == std::string_view::npos) {
                        throw decode_error("polybius: unterminated bracket escape at position " +
                                           std::to_string(i));
                    }
                    out += std::string(ciphertext.substr(i + 1, close - i - 1));
                    i = close + 1;
                    continue;
                }
                if (c < '0' || c > '9') {
                    throw decode_error("polybius: unexpected character at position " +
                                       std::to_string(i));
                }
                if (i + 1 >= ciphertext.size()) {
                    throw decode_error("polybius: odd-length digit run at position " +
                                       std::to_string(i));
                }
                const char c2 = ciphertext[i + 1];
                if (c == '0') {
                    if (c2 != '0') {
                        throw decode_error("polybius: bad pair at position " + std::to_string(i));
                    }
                    out += ' ';
                } else if (c == '9') {
                    if (c2 < '0' || c2 > '9') {
                        throw decode_error("polybius: bad digit escape at position " +
                                           std::to_string(i));
                    }
                    out += c2;
                } else if (c >= '1' && c <= '5') {
                    if (c2 < '1' || c2 > '5') {
                        throw decode_error("polybius: coordinate digit outside 1-5 at position " +
                                           std::to_string(i + 1));
                    }
                    out += scheme.polybius_grid[static_cast<std::size_t>(c - '1') * 5 +
                                                static_cast<std::size_t>(c2 - '1')];
                } else {
                    throw decode_error("polybius: coordinate digit outside 1-5 at position " +
                                       std::to_string(i));
                }
                i += 2;
            }
            return out;
        }
        case Kind::kAdjacentSwap: {
            // Self-inverse.
            return encode(scheme, ciphertext);
        }
        case Kind::kSubstitution: {
            std::array<char, 26> inverse{};
            for (std::size_t i = 0; i < 26; ++i) {
                inverse[static_cast<std::size_t>(scheme.substitution_table[i] - 'a')] =
                    static_cast<char>('a' + i);
            }
            const std::u32string cps = detail::decode_utf8(ciphertext);
            std::u32string out;
            out.reserve(cps.size());
            for (char32_t raw : cps) {
                const char32_t c = detail::to_lower(raw);
                out.push_back((c >= U'a' && c <= U'z')
                                  ? static_cast<char32_t>(inverse[c - U'a'])
                                  : c);
            }
            return detail::encode_utf8(out);
        }
    }
    throw invalid_input_error("decode: unknown cipher kind");
}

// ---------------------------------------------------------------------------
// corpus transformation
// ---------------------------------------------------------------------------

struct TextRecord {
    std::string id;
    int label = 0;
    std::string text;
};

// Applies the scheme to each record's text; order and labels are preserved.
inline std::vector<TextRecord> transform_corpus(const Scheme& scheme,
                                                const std::vector<TextRecord>& corpus,
                                                bool decode_mode = false) {
    std::vector<TextRecord> out;
    out.reserve(corpus.size());
    for (const auto& rec : corpus) {
        TextRecord t = rec;
        t.text = decode_mode ? decode(scheme, rec.text) : encode(scheme, rec.text);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace streamprobe::cipher
