#pragma once

// UTF-8 <-> code point conversion and simple case mapping.
// All string algorithms in this library work on std::u32string so that
// lengths and indices count Unicode scalar values, never bytes.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>

namespace lemming {

class Utf8Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::u32string utf8_decode(std::string_view in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const auto b0 = static_cast<unsigned char>(in[i]);
    char32_t cp = 0;
    int extra = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      throw Utf8Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + extra >= in.size() && extra > 0) {
      throw Utf8Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw Utf8Error("invalid UTF-8 continuation byte at offset " +
                        std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMinForLength[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[extra] || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw Utf8Error("invalid UTF-8 code point at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
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

inline std::string utf8_encode(std::u32string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char32_t cp : in) utf8_append(out, cp);
  return out;
}

inline char32_t to_lower(char32_t c) {
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
}
inline char32_t to_upper(char32_t c) {
  return static_cast<char32_t>(u_toupper(static_cast<UChar32>(c)));
}

inline std::u32string to_lower(std::u32string_view s) {
  std::u32string out(s);
  for (auto& c : out) c = to_lower(c);
  return out;
}
inline std::u32string to_upper(std::u32string_view s) {
  std::u32string out(s);
  for (auto& c : out) c = to_upper(c);
  return out;
}

/// Lowercase everything, then uppercase the first character.
inline std::u32string to_first_upper(std::u32string_view s) {
  std::u32string out = to_lower(s);
  if (!out.empty()) out[0] = to_upper(out[0]);
  return out;
}

inline std::string to_lower(std::string_view s) {
  return utf8_encode(to_lower(utf8_decode(s)));
}

inline bool is_upper(char32_t c) { return u_isupper(static_cast<UChar32>(c)); }
inline bool is_lower(char32_t c) { return u_islower(static_cast<UChar32>(c)); }
inline bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }

enum class Casing { kLower, kFirstUpper, kAllUpper, kMixed };

/// Casing class of a string. Strings without cased letters count as lower.
inline Casing casing_of(std::u32string_view s) {
  bool any_upper = false;
  bool any_lower = false;
  for (char32_t c : s) {
    any_upper |= is_upper(c);
    any_lower |= is_lower(c);
  }
  if (!any_upper) return Casing::kLower;
  if (!any_lower) return s.size() == 1 ? Casing::kFirstUpper : Casing::kAllUpper;
  if (is_upper(s[0]) && std::u32string(s) == to_first_upper(s))
    return Casing::kFirstUpper;
  return Casing::kMixed;
}

inline bool equals_ignore_case(std::string_view a, std::string_view b) {
  if (a == b) return true;
  return to_lower(utf8_decode(a)) == to_lower(utf8_decode(b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace lemming
