#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clothccd {

/// Streaming JSON emitter. Reals print with 17 significant digits (non-finite
/// values become null); compact output unless `pretty`, which indents by two
/// spaces.
class JsonWriter {
 public:
  explicit JsonWriter(bool pretty = false) : pretty_(pretty) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);

  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

  template <typename T>
  JsonWriter& field(std::string_view name, const T& v) {
    key(name);
    return value(v);
  }

  /// The document followed by a newline.
  std::string str() const { return out_ + "\n"; }

 private:
  void before_value();
  void newline();
  void open(char c);
  void close(char c);
  void write_string(std::string_view v);

  bool pretty_;
  std::string out_;
  // One entry per open container: whether it already holds an element.
  std::vector<bool> has_element_;
  bool after_key_ = false;
};

std::string format_real(double v);

}  // namespace clothccd
