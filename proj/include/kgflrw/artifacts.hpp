#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kgflrw/errors.hpp"

namespace kgflrw {

inline constexpr const char* tool_version = "kgflrw 1.0.0";

// fixed float formatting: scientific, 17 significant digits, byte-stable
inline std::string fmt_float(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

inline std::string fmt_int(long long x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", x);
    return buf;
}

// FNV-1a 64-bit over raw bytes; artifacts embed the hash of the config file
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct artifact_metadata {
    std::string command;
    std::string config_hash;
    double rtol = 0.0, atol = 0.0;
    long long seed = 0;
};

// ---------------------------------------------------------------------------
// CSV with '#' metadata header lines, comma separator, LF endings
// ---------------------------------------------------------------------------
class csv_writer {
public:
    csv_writer(const std::string& path, const artifact_metadata& meta,
               const std::vector<std::string>& columns) {
        out_.open(path, std::ios::binary);
        if (!out_) throw config_error("cannot open artifact for writing: " + path);
        out_ << "# tool: " << tool_version << "\n";
        out_ << "# command: " << meta.command << "\n";
        out_ << "# config_hash: " << meta.config_hash << "\n";
        out_ << "# rtol: " << fmt_float(meta.rtol) << "\n";
        out_ << "# atol: " << fmt_float(meta.atol) << "\n";
        out_ << "# seed: " << meta.seed << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }

private:
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// minimal JSON emitter with the same float policy (nlohmann is used for
// parsing configs; emission is hand-rolled for byte-stable artifacts)
// ---------------------------------------------------------------------------
class json_writer {
public:
    std::string str() const { return buf_; }

    json_writer& begin_object() { return put("{"); }
    json_writer& end_object() {
        trim_comma();
        return put("},");
    }
    json_writer& begin_array(const std::string& key) {
        key_(key);
        return put("[");
    }
    json_writer& begin_object(const std::string& key) {
        key_(key);
        return put("{");
    }
    json_writer& end_array() {
        trim_comma();
        return put("],");
    }
    json_writer& kv(const std::string& key, double v) {
        key_(key);
        return put(fmt_float(v) + ",");
    }
    json_writer& kv(const std::string& key, long long v) {
        key_(key);
        return put(fmt_int(v) + ",");
    }
    json_writer& kv(const std::string& key, int v) { return kv(key, (long long)v); }
    json_writer& kv(const std::string& key, bool v) {
        key_(key);
        return put(v ? "true," : "false,");
    }
    json_writer& kv(const std::string& key, const std::string& v) {
        key_(key);
        return put(quote(v) + ",");
    }
    json_writer& kv(const std::string& key, const char* v) { return kv(key, std::string(v)); }
    json_writer& value(double v) { return put(fmt_float(v) + ","); }
    json_writer& value_object_begin() { return put("{"); }

    void write(const std::string& path) {
        trim_comma();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw config_error("cannot open artifact for writing: " + path);
        out << buf_ << "\n";
    }

    static std::string quote(const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            switch (c) {
                case '"': q += "\\\""; break;
                case '\\': q += "\\\\"; break;
                case '\n': q += "\\n"; break;
                case '\t': q += "\\t"; break;
                default: q += c;
            }
        }
        q += "\"";
        return q;
    }

private:
    json_writer& put(const std::string& s) {
        buf_ += s;
        return *this;
    }
    void key_(const std::string& key) { buf_ += quote(key) + ":"; }
    void trim_comma() {
        if (!buf_.empty() && buf_.back() == ',') buf_.pop_back();
    }
    std::string buf_;
};

inline void json_metadata(json_writer& w, const artifact_metadata& meta) {
    w.begin_object("metadata");
    w.kv("tool", tool_version);
    w.kv("command", meta.command);
    w.kv("config_hash", meta.config_hash);
    w.kv("rtol", meta.rtol);
    w.kv("atol", meta.atol);
    w.kv("seed", meta.seed);
    w.end_object();
}

} // namespace kgflrw
