#pragma once

// Number formatting and a minimal streaming JSON writer with fixed 17-digit output.

#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isect5::report {

/// Round-trip exact: 17 significant digits; non-finite values become null.
inline std::string fmt17(double x) {
    if (!std::isfinite(x)) return "null";
    if (x == 0.0) x = 0.0; // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Six significant digits for human-readable tables.
inline std::string fmt6(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    std::string s = buf;
    if (s == "-0") s = "0";
    return s;
}

inline std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out + "\"";
}

/// Pretty-printed JSON, two-space indent; numeric arrays stay on one line.
class JsonWriter {
public:
    JsonWriter& begin_object() { return open('{'); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array() { return open('['); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& key(std::string_view k) {
        separator();
        out_ += quote(k) + ": ";
        pending_key_ = true;
        return *this;
    }

    JsonWriter& value(double x) { return raw(fmt17(x)); }
    JsonWriter& value(int x) { return raw(std::to_string(x)); }
    JsonWriter& value(long x) { return raw(std::to_string(x)); }
    JsonWriter& value(std::size_t x) { return raw(std::to_string(x)); }
    JsonWriter& value(bool x) { return raw(x ? "true" : "false"); }
    JsonWriter& value(std::string_view s) { return raw(quote(s)); }
    JsonWriter& value(const char* s) { return raw(quote(s)); }
    JsonWriter& null() { return raw("null"); }

    JsonWriter& numbers(std::span<const double> xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt17(xs[i]);
        return raw(s + "]");
    }

    template <class T>
    JsonWriter& field(std::string_view k, const T& v) {
        key(k);
        return value(v);
    }

    JsonWriter& field_numbers(std::string_view k, std::span<const double> xs) {
        key(k);
        return numbers(xs);
    }

    const std::string& str() const { return out_; }

private:
    std::string out_;
    std::vector<bool> has_items_;
    bool pending_key_ = false;

    void indent() {
        out_ += '\n';
        out_.append(2 * has_items_.size(), ' ');
    }

    void separator() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        if (!has_items_.empty()) {
            if (has_items_.back()) out_ += ',';
            has_items_.back() = true;
            indent();
        }
    }

    JsonWriter& raw(const std::string& s) {
        separator();
        out_ += s;
        return *this;
    }

    JsonWriter& open(char c) {
        separator();
        out_ += c;
        has_items_.push_back(false);
        return *this;
    }

    JsonWriter& close(char c) {
        const bool items = has_items_.back();
        has_items_.pop_back();
        if (items) indent();
        out_ += c;
        if (has_items_.empty()) out_ += '\n';
        return *this;
    }
};

} // namespace isect5::report
