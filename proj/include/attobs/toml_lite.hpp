/**
 * @file toml_lite.hpp
 * @brief Reader/writer for the TOML subset used by scenario files.
 *
 * Supported: comments, bare and quoted keys, dotted keys, [tables],
 * [[arrays of tables]], basic strings, booleans, integers, floats
 * (including inf/nan) and arrays that may span lines. Inline tables,
 * literal strings and dates are not supported.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace attobs::toml {

class ParseError : public std::runtime_error
{
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

struct Value
{
  enum class Kind { boolean, integer, floating, string, array, table };

  Kind kind = Kind::table;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;
  Array arr;
  Table tbl;
  /// Set for tables created by [[header]].
  bool table_array = false;

  static Value boolean(bool v) { Value x; x.kind = Kind::boolean; x.b = v; return x; }
  static Value integer(std::int64_t v) { Value x; x.kind = Kind::integer; x.i = v; return x; }
  static Value floating(double v) { Value x; x.kind = Kind::floating; x.d = v; return x; }
  static Value string(std::string v) { Value x; x.kind = Kind::string; x.s = std::move(v); return x; }
  static Value array(Array v = {}) { Value x; x.kind = Kind::array; x.arr = std::move(v); return x; }
  static Value table(Table v = {}) { Value x; x.kind = Kind::table; x.tbl = std::move(v); return x; }

  bool is_number() const { return kind == Kind::integer || kind == Kind::floating; }
  double as_number() const { return kind == Kind::integer ? static_cast<double>(i) : d; }
};

inline const char* kind_name(Value::Kind k)
{
  switch (k) {
    case Value::Kind::boolean: return "boolean";
    case Value::Kind::integer: return "integer";
    case Value::Kind::floating: return "float";
    case Value::Kind::string: return "string";
    case Value::Kind::array: return "array";
    case Value::Kind::table: return "table";
  }
  return "?";
}

namespace detail {

class Parser
{
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Table parse()
  {
    Table root;
    Table* current = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof())
        break;
      if (peek() == '[') {
        current = parse_header(root);
      } else {
        parse_key_value(*current);
      }
      expect_line_end();
    }
    return root;
  }

private:
  std::string_view text_;
  std::set<const Table*> defined_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char get()
  {
    const char c = text_[pos_++];
    if (c == '\n')
      ++line_;
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  void skip_ws()
  {
    while (!eof() && (peek() == ' ' || peek() == '\t'))
      ++pos_;
  }
  void skip_comment()
  {
    if (peek() == '#')
      while (!eof() && peek() != '\n')
        ++pos_;
  }
  void skip_ws_comments_newlines()
  {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
        get();
      else if (c == '#')
        skip_comment();
      else
        break;
    }
  }
  void expect_line_end()
  {
    skip_ws();
    skip_comment();
    if (peek() == '\r')
      ++pos_;
    if (eof())
      return;
    if (peek() != '\n')
      fail(std::string("unexpected character '") + peek() + "' after value");
    get();
  }

  static bool bare_key_char(char c)
  {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  std::string parse_simple_key()
  {
    skip_ws();
    if (peek() == '"')
      return parse_basic_string();
    const std::size_t start = pos_;
    while (!eof() && bare_key_char(peek()))
      ++pos_;
    if (pos_ == start)
      fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::vector<std::string> parse_dotted_key()
  {
    std::vector<std::string> parts{parse_simple_key()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      parts.push_back(parse_simple_key());
      skip_ws();
    }
    return parts;
  }

  Table& descend(Table& root, const std::vector<std::string>& path, std::size_t count)
  {
    Table* t = &root;
    for (std::size_t k = 0; k < count; ++k) {
      auto it = t->find(path[k]);
      if (it == t->end())
        it = t->emplace(path[k], Value::table()).first;
      Value& v = it->second;
      if (v.kind == Value::Kind::table) {
        t = &v.tbl;
      } else if (v.kind == Value::Kind::array && !v.arr.empty() && v.arr.back().table_array) {
        t = &v.arr.back().tbl;
      } else {
        fail("key '" + path[k] + "' is not a table");
      }
    }
    return *t;
  }

  Table* parse_header(Table& root)
  {
    ++pos_;
    const bool is_array = peek() == '[';
    if (is_array)
      ++pos_;
    const auto path = parse_dotted_key();
    if (peek() != ']')
      fail("expected ']' to close table header");
    ++pos_;
    if (is_array) {
      if (peek() != ']')
        fail("expected ']]' to close array-of-tables header");
      ++pos_;
    }
    Table& parent = descend(root, path, path.size() - 1);
    const std::string& leaf = path.back();
    auto it = parent.find(leaf);
    if (is_array) {
      if (it == parent.end())
        it = parent.emplace(leaf, Value::array()).first;
      Value& arr = it->second;
      if (arr.kind != Value::Kind::array || (!arr.arr.empty() && !arr.arr.front().table_array))
        fail("'" + leaf + "' is not an array of tables");
      Value t = Value::table();
      t.table_array = true;
      arr.arr.push_back(std::move(t));
      return &arr.arr.back().tbl;
    }
    if (it == parent.end())
      it = parent.emplace(leaf, Value::table()).first;
    else if (it->second.kind != Value::Kind::table)
      fail("'" + leaf + "' redefined as a table");
    if (!defined_.insert(&it->second.tbl).second)
      fail("table '" + leaf + "' defined twice");
    return &it->second.tbl;
  }

  void parse_key_value(Table& current)
  {
    const auto path = parse_dotted_key();
    skip_ws();
    if (peek() != '=')
      fail("expected '=' after key");
    ++pos_;
    skip_ws();
    Value v = parse_value();
    Table& t = descend(current, path, path.size() - 1);
    if (!t.emplace(path.back(), std::move(v)).second)
      fail("duplicate key '" + path.back() + "'");
  }

  std::string parse_basic_string()
  {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (eof() || peek() == '\n')
        fail("unterminated string");
      const char c = get();
      if (c == '"')
        break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (eof())
        fail("unterminated escape");
      const char e = get();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
    return out;
  }

  Value parse_value()
  {
    const char c = peek();
    if (c == '"')
      return Value::string(parse_basic_string());
    if (c == '[')
      return parse_array();
    if (c == '{')
      fail("inline tables are not supported");
    const std::size_t start = pos_;
    while (!eof()) {
      const char d = peek();
      if (d == ',' || d == ']' || d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '#')
        break;
      ++pos_;
    }
    const std::string token(text_.substr(start, pos_ - start));
    if (token.empty())
      fail("expected a value");
    if (token == "true")
      return Value::boolean(true);
    if (token == "false")
      return Value::boolean(false);
    return parse_number(token);
  }

  Value parse_number(std::string token)
  {
    std::string clean;
    for (char ch : token)
      if (ch != '_')
        clean.push_back(ch);
    std::string body = clean;
    bool negative = false;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      negative = body[0] == '-';
      body.erase(0, 1);
    }
    if (body == "inf")
      return Value::floating(negative ? -INFINITY : INFINITY);
    if (body == "nan")
      return Value::floating(NAN);
    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    const char* first = clean.data() + (clean[0] == '+' ? 1 : 0);
    const char* last = clean.data() + clean.size();
    if (is_float) {
      double d = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || ptr != last)
        fail("invalid number '" + token + "'");
      return Value::floating(d);
    }
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec == std::errc::result_out_of_range)
      fail("integer out of range '" + token + "'");
    if (ec != std::errc() || ptr != last)
      fail("invalid value '" + token + "'");
    return Value::integer(i);
  }

  Value parse_array()
  {
    ++pos_;
    Value arr = Value::array();
    while (true) {
      skip_ws_comments_newlines();
      if (eof())
        fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        break;
      }
      arr.arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        break;
      }
      fail("expected ',' or ']' in array");
    }
    return arr;
  }
};

}  // namespace detail

inline Table parse(std::string_view text) { return detail::Parser(text).parse(); }

/// Shortest round-trip representation that still reads back as a float.
inline std::string format_float(double d)
{
  if (std::isnan(d))
    return "nan";
  if (std::isinf(d))
    return d > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eE") == std::string::npos)
    s += ".0";
  return s;
}

namespace detail {

inline bool is_bare(const std::string& k)
{
  if (k.empty())
    return false;
  for (char c : k)
    if (!((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-'))
      return false;
  return true;
}

inline std::string key(const std::string& k) { return is_bare(k) ? k : "\"" + k + "\""; }

inline std::string inline_value(const Value& v)
{
  switch (v.kind) {
    case Value::Kind::boolean: return v.b ? "true" : "false";
    case Value::Kind::integer: return std::to_string(v.i);
    case Value::Kind::floating: return format_float(v.d);
    case Value::Kind::string: {
      std::string out = "\"";
      for (char c : v.s) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          case '\r': out += "\\r"; break;
          default: out.push_back(c);
        }
      }
      return out + "\"";
    }
    case Value::Kind::array: {
      std::string out = "[";
      for (std::size_t k = 0; k < v.arr.size(); ++k) {
        if (k)
          out += ", ";
        out += inline_value(v.arr[k]);
      }
      return out + "]";
    }
    case Value::Kind::table: throw std::logic_error("inline tables are not emitted");
  }
  return {};
}

inline bool is_table_array(const Value& v)
{
  return v.kind == Value::Kind::array && !v.arr.empty() && v.arr.front().kind == Value::Kind::table;
}

inline void emit(const Table& t, const std::string& prefix, std::string& out)
{
  for (const auto& [k, v] : t)
    if (v.kind != Value::Kind::table && !is_table_array(v))
      out += key(k) + " = " + inline_value(v) + "\n";
  for (const auto& [k, v] : t) {
    const std::string path = prefix.empty() ? key(k) : prefix + "." + key(k);
    if (v.kind == Value::Kind::table) {
      bool has_leaf = false;
      for (const auto& [ck, cv] : v.tbl)
        has_leaf = has_leaf || (cv.kind != Value::Kind::table && !is_table_array(cv));
      if (has_leaf || v.tbl.empty())
        out += "\n[" + path + "]\n";
      emit(v.tbl, path, out);
    } else if (is_table_array(v)) {
      for (const auto& item : v.arr) {
        out += "\n[[" + path + "]]\n";
        emit(item.tbl, path, out);
      }
    }
  }
}

}  // namespace detail

inline std::string serialize(const Table& t)
{
  std::string out;
  detail::emit(t, "", out);
  return out;
}

}  // namespace attobs::toml
