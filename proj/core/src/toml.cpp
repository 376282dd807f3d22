#include "fusionloc/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fusionloc/errors.hpp"

namespace fusionloc::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw InvalidInputError("toml: line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_bare_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      return false;
    }
  }
  return true;
}

std::vector<std::string> split_dotted(const std::string& name, int line) {
  std::vector<std::string> parts;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = strip(part);
    if (!valid_bare_key(part)) fail(line, "bad key '" + part + "'");
    parts.push_back(part);
  }
  if (parts.empty()) fail(line, "empty table name");
  return parts;
}

class ValueParser {
 public:
  ValueParser(std::string text, int line) : text_(std::move(text)), line_(line) {}

  Value parse_all() {
    Value v = parse_value();
    skip_ws();
    if (pos_ != text_.size()) fail(line_, "trailing characters after value");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= text_.size()) fail(line_, "missing value");
    const char c = text_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  Value parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\' && pos_ < text_.size()) {
        const char esc = text_[pos_++];
        switch (esc) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(line_, "unsupported escape");
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) fail(line_, "unterminated string");
    ++pos_;  // closing quote
    return Value::string(std::move(out));
  }

  Value parse_array() {
    ++pos_;  // '['
    std::vector<Value> items;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return Value::array(std::move(items));
    }
    while (true) {
      items.push_back(parse_value());
      skip_ws();
      if (pos_ >= text_.size()) fail(line_, "unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {  // trailing comma
          ++pos_;
          break;
        }
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        break;
      }
      fail(line_, "expected ',' or ']' in array");
    }
    return Value::array(std::move(items));
  }

  Value parse_scalar() {
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ',' && text_[end] != ']' &&
           text_[end] != ' ' && text_[end] != '\t') {
      ++end;
    }
    const std::string tok = text_.substr(pos_, end - pos_);
    pos_ = end;
    if (tok == "true") return Value::boolean(true);
    if (tok == "false") return Value::boolean(false);

    bool integral = !tok.empty();
    for (std::size_t i = 0; i < tok.size(); ++i) {
      const char c = tok[i];
      if (i == 0 && (c == '+' || c == '-')) continue;
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        integral = false;
        break;
      }
    }
    if (integral && tok != "+" && tok != "-") {
      return Value::integer(std::strtoll(tok.c_str(), nullptr, 10));
    }
    char* endp = nullptr;
    const double d = std::strtod(tok.c_str(), &endp);
    if (endp == tok.c_str() + tok.size() && !tok.empty()) {
      return Value::floating(d);
    }
    fail(line_, "cannot parse value '" + tok + "'");
  }

  const std::string text_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Value::contains(const std::string& key) const {
  return kind_ == Kind::Table && table_.count(key) > 0;
}

const Value& Value::at(const std::string& key) const {
  if (kind_ != Kind::Table) throw InvalidInputError("toml: not a table");
  auto it = table_.find(key);
  if (it == table_.end()) {
    throw InvalidInputError("toml: missing key '" + key + "'");
  }
  return it->second;
}

Value& Value::insert(const std::string& key, Value v) {
  return table_[key] = std::move(v);
}

std::int64_t Value::as_int() const {
  if (kind_ != Kind::Integer) throw InvalidInputError("toml: expected integer");
  return int_;
}

double Value::as_double() const {
  if (kind_ == Kind::Integer) return static_cast<double>(int_);
  if (kind_ != Kind::Float) throw InvalidInputError("toml: expected number");
  return float_;
}

bool Value::as_bool() const {
  if (kind_ != Kind::Boolean) throw InvalidInputError("toml: expected boolean");
  return bool_;
}

const std::string& Value::as_string() const {
  if (kind_ != Kind::String) throw InvalidInputError("toml: expected string");
  return string_;
}

const std::vector<Value>& Value::as_array() const {
  if (kind_ != Kind::Array) throw InvalidInputError("toml: expected array");
  return array_;
}

std::int64_t Value::get_int(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? at(key).as_int() : fallback;
}

double Value::get_double(const std::string& key, double fallback) const {
  return contains(key) ? at(key).as_double() : fallback;
}

std::string Value::get_string(const std::string& key,
                              const std::string& fallback) const {
  return contains(key) ? at(key).as_string() : fallback;
}

Value Value::integer(std::int64_t v) {
  Value out(Kind::Integer);
  out.int_ = v;
  return out;
}

Value Value::floating(double v) {
  Value out(Kind::Float);
  out.float_ = v;
  return out;
}

Value Value::boolean(bool v) {
  Value out(Kind::Boolean);
  out.bool_ = v;
  return out;
}

Value Value::string(std::string v) {
  Value out(Kind::String);
  out.string_ = std::move(v);
  return out;
}

Value Value::array(std::vector<Value> v) {
  Value out(Kind::Array);
  out.array_ = std::move(v);
  return out;
}

Value parse(const std::string& text) {
  Value root(Value::Kind::Table);
  Value* current = &root;

  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = strip(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      const bool array_table = line.size() > 1 && line[1] == '[';
      const std::string closer = array_table ? "]]" : "]";
      const std::size_t open = array_table ? 2 : 1;
      const std::size_t close = line.rfind(closer);
      if (close == std::string::npos || close + closer.size() != line.size()) {
        fail(line_no, "malformed table header");
      }
      const auto parts = split_dotted(line.substr(open, close - open), line_no);

      Value* node = &root;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i])) {
          node = &node->insert(parts[i], Value(Value::Kind::Table));
        } else {
          Value& next = node->table_[parts[i]];
          // Dotted paths may traverse an array of tables: use its last entry.
          node = next.is_array() ? &next.array_.back() : &next;
          if (!node->is_table()) fail(line_no, "key is not a table");
        }
      }
      const std::string& leaf = parts.back();
      if (array_table) {
        if (!node->contains(leaf)) {
          node->insert(leaf, Value(Value::Kind::Array));
        }
        Value& arr = node->table_[leaf];
        if (!arr.is_array()) fail(line_no, "key is not an array of tables");
        arr.array_.push_back(Value(Value::Kind::Table));
        current = &arr.array_.back();
      } else {
        if (node->contains(leaf)) fail(line_no, "duplicate table");
        current = &node->insert(leaf, Value(Value::Kind::Table));
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = strip(line.substr(0, eq));
    if (!valid_bare_key(key)) fail(line_no, "bad key '" + key + "'");
    if (current->contains(key)) fail(line_no, "duplicate key '" + key + "'");
    ValueParser vp(strip(line.substr(eq + 1)), line_no);
    current->insert(key, vp.parse_all());
  }
  return root;
}

Value parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("toml: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

}  // namespace fusionloc::toml
