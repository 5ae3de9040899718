#pragma once

// Reader for the TOML subset used by experiment configs: comments, [table]
// and [dotted.table] headers, bare or quoted keys, basic strings, integers,
// floats, booleans, (multi-line) arrays and inline tables. The result is a
// nlohmann::json object so TOML and JSON configs share one decoder.

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pushsum/core.hpp"

namespace pushsum::toml {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        table = &root;
        for (;;) {
          skip_ws();
          std::string key = parse_key();
          nlohmann::json& next = (*table)[key];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("'" + key + "' is not a table");
          table = &next;
          skip_ws();
          if (peek() == '.') {
            ++pos_;
            continue;
          }
          expect(']');
          break;
        }
      } else {
        std::string key = parse_key();
        skip_ws();
        expect('=');
        skip_ws();
        if (table->contains(key)) fail("duplicate key '" + key + "'");
        (*table)[key] = parse_value();
      }
      end_of_statement();
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t k = 0; k < pos_ && k < s_.size(); ++k) line += s_[k] == '\n';
    throw ConfigError("toml line " + std::to_string(line) + ": " + what);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (!eof() && peek() == '\n') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void end_of_statement() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_;
  }

  std::string parse_key() {
    if (eof()) fail("expected key");
    if (peek() == '"') return parse_string();
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (start == pos_) fail("expected key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (!eof() && peek() != '"') {
      char c = s_[pos_++];
      if (c == '\n') fail("newline in string");
      if (c == '\\') {
        if (eof()) fail("dangling escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    expect('"');
    return out;
  }

  // whitespace, newlines and comments inside arrays
  void skip_array_space() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (!eof() && peek() == '\n') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  nlohmann::json parse_value() {
    if (eof()) fail("expected value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      for (;;) {
        skip_array_space();
        if (!eof() && peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(parse_value());
        skip_array_space();
        if (!eof() && peek() == ',') {
          ++pos_;
          continue;
        }
        expect(']');
        return arr;
      }
    }
    if (c == '{') {
      ++pos_;
      nlohmann::json obj = nlohmann::json::object();
      skip_ws();
      if (!eof() && peek() == '}') {
        ++pos_;
        return obj;
      }
      for (;;) {
        skip_ws();
        std::string key = parse_key();
        skip_ws();
        expect('=');
        skip_ws();
        if (obj.contains(key)) fail("duplicate key '" + key + "'");
        obj[key] = parse_value();
        skip_ws();
        if (!eof() && peek() == ',') {
          ++pos_;
          continue;
        }
        expect('}');
        return obj;
      }
    }
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  nlohmann::json parse_number() {
    std::size_t start = pos_;
    bool is_float = false;
    std::string digits;
    while (!eof()) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
        digits += c;
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        digits += c;
      } else if (c == '_') {
        // digit separator
      } else {
        break;
      }
      ++pos_;
    }
    if (start == pos_ || digits.empty()) fail("expected value");
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used != digits.size()) fail("malformed number '" + digits + "'");
        return v;
      }
      const long long v = std::stoll(digits, &used);
      if (used != digits.size()) fail("malformed number '" + digits + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed number '" + digits + "'");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline nlohmann::json parse(std::string_view text) { return Parser(text).parse(); }

}  // namespace pushsum::toml
