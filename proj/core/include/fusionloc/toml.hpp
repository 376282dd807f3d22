#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fusionloc::toml {

// Minimal TOML reader covering what the model config files use: bare keys,
// [table] and [[array-of-table]] headers with dotted names, strings,
// integers, floats, booleans, and single-line (possibly nested) arrays.
// Parse errors throw InvalidInputError with a line number.
class Value {
 public:
  enum class Kind { Integer, Float, Boolean, String, Array, Table };

  Value() : kind_(Kind::Table) {}
  explicit Value(Kind k) : kind_(k) {}

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::Table; }
  bool is_array() const { return kind_ == Kind::Array; }

  // Table access.
  bool contains(const std::string& key) const;
  const Value& at(const std::string& key) const;
  Value& insert(const std::string& key, Value v);
  const std::map<std::string, Value>& items() const { return table_; }

  // Scalar access (integers promote to double).
  std::int64_t as_int() const;
  double as_double() const;
  bool as_bool() const;
  const std::string& as_string() const;
  const std::vector<Value>& as_array() const;

  // Typed convenience lookups with defaults.
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  static Value integer(std::int64_t v);
  static Value floating(double v);
  static Value boolean(bool v);
  static Value string(std::string v);
  static Value array(std::vector<Value> v);

 private:
  friend Value parse(const std::string& text);

  Kind kind_;
  std::int64_t int_ = 0;
  double float_ = 0.0;
  bool bool_ = false;
  std::string string_;
  std::vector<Value> array_;
  std::map<std::string, Value> table_;
};

Value parse(const std::string& text);
Value parse_file(const std::string& path);

}  // namespace fusionloc::toml
