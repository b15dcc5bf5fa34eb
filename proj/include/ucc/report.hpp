#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace ucc {

// Locale-independent shortest-or-17-digit rendering for CSV/JSON payloads.
std::string format_double(double v);

std::string sha256_hex(const std::string& bytes);

// write-then-rename so outputs never appear half-written
void atomic_write_file(const std::string& path, const std::string& content);

// Minimal JSON value for report emission (numbers rendered via format_double).
class JsonValue {
public:
    using Object = std::vector<std::pair<std::string, JsonValue>>;  // insertion-ordered
    using Array = std::vector<JsonValue>;

    JsonValue() : v_(nullptr) {}
    JsonValue(std::nullptr_t) : v_(nullptr) {}
    JsonValue(bool b) : v_(b) {}
    JsonValue(double d) : v_(d) {}
    JsonValue(int i) : v_(double(i)) {}
    JsonValue(long long i) : v_(double(i)) {}
    JsonValue(unsigned long long i) : v_(double(i)) {}
    JsonValue(const char* s) : v_(std::string(s)) {}
    JsonValue(std::string s) : v_(std::move(s)) {}
    JsonValue(Array a) : v_(std::move(a)) {}
    JsonValue(Object o) : v_(std::move(o)) {}

    static JsonValue raw(std::string json_text);  // pre-serialized fragment

    std::string dump(int indent = 2) const;

private:
    struct Raw {
        std::string text;
    };
    std::variant<std::nullptr_t, bool, double, std::string, Array, Object, Raw> v_;
    void emit(std::string& out, int indent, int depth) const;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string to_string() const;
};

}  // namespace ucc
