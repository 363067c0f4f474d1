// Copyright 2026 The tendonkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reader and writer for the structured-text dialect shared by model, scenario,
// grid and tension-problem files. The grammar is documented in
// docs/model-format.md:
//
//   # comment
//   key = value                 (top-level table)
//   [section.name]
//   key = 1.5 deg               numbers, optional `deg`/`rad` suffix
//   key = "text"                strings
//   key = true                  booleans
//   key = [1, 2, [3, 4]]        arrays, nesting allowed, may span lines

#ifndef TENDONKIT_TEXT_FORMAT_HPP_
#define TENDONKIT_TEXT_FORMAT_HPP_

#include <cctype>
#include <charconv>
#include <limits>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/errors.hpp"

namespace tendonkit::text {

enum class Unit { kNone, kDeg, kRad };

struct Value {
  enum class Type { kNumber, kString, kBool, kArray };

  Type type = Type::kNumber;
  double number = 0.0;
  Unit unit = Unit::kNone;
  std::string string;
  bool boolean = false;
  std::vector<Value> items;
  int line = 0;
  int column = 0;

  static Value Number(double v, Unit u = Unit::kNone) {
    Value out;
    out.type = Type::kNumber;
    out.number = v;
    out.unit = u;
    return out;
  }
  static Value String(std::string s) {
    Value out;
    out.type = Type::kString;
    out.string = std::move(s);
    return out;
  }
  static Value Bool(bool b) {
    Value out;
    out.type = Type::kBool;
    out.boolean = b;
    return out;
  }
  static Value Array(std::vector<Value> items) {
    Value out;
    out.type = Type::kArray;
    out.items = std::move(items);
    return out;
  }
};

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

class Section {
 public:
  Section() = default;
  Section(std::string name, int line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }
  const std::vector<Entry>& entries() const { return entries_; }

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries_) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
  bool has(std::string_view key) const { return find(key) != nullptr; }

  // Inserts or replaces.
  void set(std::string key, Value value, int line = 0) {
    for (auto& e : entries_) {
      if (e.key == key) {
        e.value = std::move(value);
        return;
      }
    }
    entries_.push_back(Entry{std::move(key), std::move(value), line});
  }

  // Typed accessors. A missing key throws ValidationError unless a fallback
  // is supplied; wrong types always throw.
  double number(std::string_view key) const { return as_number(required(key), key); }
  double number(std::string_view key, double fallback) const {
    const Entry* e = find(key);
    return e ? as_number(*e, key) : fallback;
  }
  // Angles in radians; accepts `deg`/`rad` suffixes.
  double angle(std::string_view key) const { return as_angle(required(key).value, key); }
  double angle(std::string_view key, double fallback) const {
    const Entry* e = find(key);
    return e ? as_angle(e->value, key) : fallback;
  }
  std::string string(std::string_view key) const {
    const Entry& e = required(key);
    if (e.value.type != Value::Type::kString) type_error(key, "a string");
    return e.value.string;
  }
  std::string string(std::string_view key, std::string fallback) const {
    return has(key) ? string(key) : std::move(fallback);
  }
  bool boolean(std::string_view key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value.type != Value::Type::kBool) type_error(key, "a boolean");
    return e->value.boolean;
  }
  Eigen::VectorXd vector(std::string_view key, bool angles = false) const {
    return as_vector(required(key).value, key, angles);
  }
  Eigen::Vector3d vec3(std::string_view key, bool angles = false) const {
    Eigen::VectorXd v = vector(key, angles);
    if (v.size() != 3) type_error(key, "a 3-element array");
    return v;
  }
  Eigen::Vector3d vec3(std::string_view key, const Eigen::Vector3d& fallback,
                       bool angles = false) const {
    return has(key) ? vec3(key, angles) : fallback;
  }
  // Nested array of equal-length rows.
  Eigen::MatrixXd matrix(std::string_view key) const {
    const Value& v = required(key).value;
    if (v.type != Value::Type::kArray) type_error(key, "an array of rows");
    Eigen::MatrixXd out;
    for (std::size_t r = 0; r < v.items.size(); ++r) {
      Eigen::VectorXd row = as_vector(v.items[r], key, false);
      if (r == 0) out.resize(static_cast<Eigen::Index>(v.items.size()), row.size());
      if (row.size() != out.cols()) type_error(key, "rows of equal length");
      out.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return out;
  }
  std::vector<std::string> strings(std::string_view key) const {
    const Value& v = required(key).value;
    if (v.type != Value::Type::kArray) type_error(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& item : v.items) {
      if (item.type != Value::Type::kString) type_error(key, "an array of strings");
      out.push_back(item.string);
    }
    return out;
  }

  std::string path(std::string_view key) const {
    return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
  }

  const Entry& required(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) {
      throw ValidationError("missing required field '" + path(key) + "'" +
                            (line_ > 0 ? " (section at line " + std::to_string(line_) + ")" : ""));
    }
    return *e;
  }

 private:
  [[noreturn]] void type_error(std::string_view key, const char* expected) const {
    const Entry* e = find(key);
    std::string where = e ? " (line " + std::to_string(e->line) + ")" : "";
    throw ValidationError("field '" + path(key) + "' must be " + expected + where);
  }

  double as_number(const Entry& e, std::string_view key) const {
    if (e.value.type != Value::Type::kNumber) type_error(key, "a number");
    if (e.value.unit != Unit::kNone) type_error(key, "a plain number (no unit suffix)");
    return e.value.number;
  }
  double as_angle(const Value& v, std::string_view key) const {
    if (v.type != Value::Type::kNumber) type_error(key, "an angle");
    return v.unit == Unit::kDeg ? v.number * std::numbers::pi / 180.0 : v.number;
  }
  Eigen::VectorXd as_vector(const Value& v, std::string_view key, bool angles) const {
    if (v.type != Value::Type::kArray) type_error(key, "an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.items.size()));
    for (std::size_t i = 0; i < v.items.size(); ++i) {
      const Value& item = v.items[i];
      if (item.type != Value::Type::kNumber) type_error(key, "an array of numbers");
      if (angles) {
        out[static_cast<Eigen::Index>(i)] = as_angle(item, key);
      } else {
        if (item.unit != Unit::kNone) type_error(key, "an array of plain numbers");
        out[static_cast<Eigen::Index>(i)] = item.number;
      }
    }
    return out;
  }

  std::string name_;
  int line_ = 0;
  std::vector<Entry> entries_;
};

class Document {
 public:
  Document() { sections_.emplace_back("", 0); }

  const Section& root() const { return sections_.front(); }
  Section& root() { return sections_.front(); }
  const std::vector<Section>& sections() const { return sections_; }

  const Section* find(std::string_view name) const {
    for (const auto& s : sections_) {
      if (s.name() == name) return &s;
    }
    return nullptr;
  }
  Section* find(std::string_view name) {
    for (auto& s : sections_) {
      if (s.name() == name) return &s;
    }
    return nullptr;
  }
  Section& add(std::string name, int line = 0) {
    sections_.emplace_back(std::move(name), line);
    return sections_.back();
  }
  Section& get_or_add(const std::string& name) {
    if (Section* s = find(name)) return *s;
    return add(name);
  }

  // Sections whose name starts with `prefix` followed by exactly one more
  // dotted component, in file order. `children("route")` yields
  // `route.a`, `route.b` but not `route.a.segment.0`.
  std::vector<const Section*> children(std::string_view prefix) const {
    std::vector<const Section*> out;
    for (const auto& s : sections_) {
      const std::string& n = s.name();
      if (n.size() <= prefix.size() + 1) continue;
      if (n.compare(0, prefix.size(), prefix) != 0 || n[prefix.size()] != '.') continue;
      if (n.find('.', prefix.size() + 1) != std::string::npos) continue;
      out.push_back(&s);
    }
    return out;
  }

 private:
  std::vector<Section> sections_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document parse() {
    Document doc;
    Section* current = &doc.root();
    while (true) {
      skip_blank_and_comments();
      if (at_end()) break;
      char c = peek();
      if (c == '[') {
        int line = line_, col = col_;
        advance();
        skip_inline_space();
        std::string name = read_section_name();
        skip_inline_space();
        expect(']');
        expect_line_end();
        if (doc.find(name) != nullptr) {
          throw ParseError("duplicate section [" + name + "]", line, col);
        }
        current = &doc.add(name, line);
      } else {
        int line = line_, col = col_;
        std::string key = read_ident();
        if (key.empty()) throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        skip_inline_space();
        expect('=');
        skip_inline_space();
        Value v = read_value();
        expect_line_end();
        if (current->has(key)) {
          throw ParseError("duplicate key '" + key + "'", line, col);
        }
        current->set(key, std::move(v), line);
      }
    }
    return doc;
  }

  // A single value with nothing after it (used for CLI overrides).
  Value parse_single_value() {
    skip_inline_space();
    Value v = read_value();
    skip_inline_space();
    if (!at_end()) throw ParseError("trailing characters after value", line_, col_);
    return v;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void expect(char c) {
    if (peek() != c) {
      throw ParseError(std::string("expected '") + c + "'", line_, col_);
    }
    advance();
  }
  void skip_inline_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
  }
  void skip_blank_and_comments() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }
  // Whitespace, newlines and comments inside arrays.
  void skip_array_space() { skip_blank_and_comments(); }
  void expect_line_end() {
    skip_inline_space();
    skip_comment();
    if (!at_end() && peek() != '\n') {
      throw ParseError("unexpected trailing content", line_, col_);
    }
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }
  std::string read_ident() {
    std::string out;
    while (!at_end() && ident_char(peek())) {
      out.push_back(peek());
      advance();
    }
    return out;
  }
  std::string read_section_name() {
    std::string out;
    while (true) {
      int line = line_, col = col_;
      std::string part = read_ident();
      if (part.empty()) throw ParseError("empty section name component", line, col);
      out += part;
      if (peek() != '.') break;
      out.push_back('.');
      advance();
    }
    return out;
  }
  Value read_value() {
    int line = line_, col = col_;
    Value v;
    char c = peek();
    if (c == '[') {
      v = read_array();
    } else if (c == '"') {
      v = Value::String(read_string());
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string word = read_ident();
      if (word == "true") {
        v = Value::Bool(true);
      } else if (word == "false") {
        v = Value::Bool(false);
      } else if (word == "inf") {
        v = Value::Number(std::numeric_limits<double>::infinity());
      } else {
        throw ParseError("unknown literal '" + word + "' (strings must be quoted)", line, col);
      }
    } else if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      v = read_number();
    } else {
      throw ParseError("expected a value", line, col);
    }
    v.line = line;
    v.column = col;
    return v;
  }
  Value read_number() {
    int line = line_, col = col_;
    std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') advance();
    if (std::isalpha(static_cast<unsigned char>(peek()))) {
      std::string word = read_ident();
      if (word != "inf") throw ParseError("malformed number", line, col);
      double inf = std::numeric_limits<double>::infinity();
      return Value::Number(text_[start] == '-' ? -inf : inf);
    }
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        advance();
      } else if (c == 'e' || c == 'E') {
        advance();
        if (peek() == '+' || peek() == '-') advance();
      } else {
        break;
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw ParseError("malformed number '" + token + "'", line, col);
    }
    Unit unit = Unit::kNone;
    std::size_t save_pos = pos_;
    int save_line = line_, save_col = col_;
    skip_inline_space();
    if (std::isalpha(static_cast<unsigned char>(peek()))) {
      int uline = line_, ucol = col_;
      std::string suffix = read_ident();
      if (suffix == "deg") {
        unit = Unit::kDeg;
      } else if (suffix == "rad") {
        unit = Unit::kRad;
      } else {
        throw ParseError("unknown unit suffix '" + suffix + "' (expected deg or rad)", uline, ucol);
      }
    } else {
      pos_ = save_pos;
      line_ = save_line;
      col_ = save_col;
    }
    return Value::Number(value, unit);
  }
  std::string read_string() {
    int line = line_, col = col_;
    expect('"');
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') throw ParseError("unterminated string", line, col);
      char c = peek();
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) throw ParseError("unterminated escape", line_, col_);
        char e = peek();
        advance();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: throw ParseError(std::string("unknown escape '\\") + e + "'", line_, col_);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }
  Value read_array() {
    expect('[');
    std::vector<Value> items;
    skip_array_space();
    if (peek() == ']') {
      advance();
      return Value::Array(std::move(items));
    }
    while (true) {
      skip_array_space();
      if (peek() == ']') {  // trailing comma
        advance();
        break;
      }
      items.push_back(read_value());
      skip_array_space();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == ']') {
        advance();
        break;
      }
      throw ParseError("expected ',' or ']' in array", line_, col_);
    }
    return Value::Array(std::move(items));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

inline Document parse(std::string_view text) { return detail::Parser(text).parse(); }

inline Value parse_value(std::string_view text) {
  return detail::Parser(text).parse_single_value();
}

// Shortest representation that round-trips exactly.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  // Keep integers recognisable as numbers only; "5" parses fine.
  return s;
}

inline std::string format_value(const Value& v) {
  switch (v.type) {
    case Value::Type::kNumber: {
      std::string s = format_number(v.number);
      if (v.unit == Unit::kDeg) s += " deg";
      if (v.unit == Unit::kRad) s += " rad";
      return s;
    }
    case Value::Type::kString: {
      std::string out = "\"";
      for (char c : v.string) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out.push_back(c);
      }
      return out + "\"";
    }
    case Value::Type::kBool:
      return v.boolean ? "true" : "false";
    case Value::Type::kArray: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        if (i) out += ", ";
        out += format_value(v.items[i]);
      }
      return out + "]";
    }
  }
  return {};
}

inline std::string write(const Document& doc) {
  std::ostringstream os;
  bool first = true;
  for (const auto& section : doc.sections()) {
    if (section.name().empty()) {
      if (section.entries().empty()) continue;
    } else {
      if (!first) os << "\n";
      os << "[" << section.name() << "]\n";
    }
    for (const auto& e : section.entries()) {
      os << e.key << " = " << format_value(e.value) << "\n";
    }
    first = false;
  }
  return os.str();
}

inline Value vector_value(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<Value> items;
  for (Eigen::Index i = 0; i < v.size(); ++i) items.push_back(Value::Number(v[i]));
  return Value::Array(std::move(items));
}

// Applies `section.key=value`. The key is split at its last dot; a key without
// a dot addresses the top-level table. Missing sections are created.
inline void apply_override(Document& doc, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidArgument("override '" + std::string(assignment) + "' is not key=value");
  }
  std::string path(assignment.substr(0, eq));
  std::string_view value_text = assignment.substr(eq + 1);
  while (!path.empty() && path.back() == ' ') path.pop_back();
  Value value = parse_value(value_text);
  auto dot = path.rfind('.');
  if (dot == std::string::npos) {
    doc.root().set(path, std::move(value));
  } else {
    doc.get_or_add(path.substr(0, dot)).set(path.substr(dot + 1), std::move(value));
  }
}

}  // namespace tendonkit::text

#endif  // TENDONKIT_TEXT_FORMAT_HPP_
