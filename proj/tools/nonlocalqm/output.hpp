#pragma once

// Result serialization: JSON with sorted keys and %.17g numbers, CSV with a
// header row.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace nonlocalqm::cli {

using Json = nlohmann::json;  // object keys are kept in a std::map, hence sorted

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_string(std::string& out, const std::string& s) {
    out += Json(s).dump();
}

inline void write_json(std::string& out, const Json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                write_string(out, it.key());
                out += ": ";
                write_json(out, it.value(), indent + 2);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                write_json(out, j[i], indent + 2);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace detail

inline std::string to_json_text(const Json& j) {
    std::string out;
    detail::write_json(out, j, 0);
    out += "\n";
    return out;
}

using Cell = std::variant<double, std::string>;

/// Column-named table. Non-finite numbers print as empty cells.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    std::string text() const {
        std::string out;
        for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
        out += "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ",";
                if (const double* d = std::get_if<double>(&r[i])) {
                    if (std::isfinite(*d)) out += format_double(*d);
                } else {
                    out += std::get<std::string>(r[i]);
                }
            }
            out += "\n";
        }
        return out;
    }
};

/// Everything an experiment produces.
struct Outputs {
    Json summary = Json::object();
    std::map<std::string, Csv> tables;  // file name -> table
};

/// Pass/fail entry that records its own tolerance.
inline Json check(double value, double tolerance, bool pass, const std::string& relation) {
    return Json{{"value", value}, {"tolerance", tolerance}, {"relation", relation}, {"pass", pass}};
}
inline Json check_le(double value, double tolerance) { return check(value, tolerance, value <= tolerance, "<="); }
inline Json check_ge(double value, double tolerance) { return check(value, tolerance, value >= tolerance, ">="); }
inline Json check_lt(double value, double tolerance) { return check(value, tolerance, value < tolerance, "<"); }
inline Json check_gt(double value, double tolerance) { return check(value, tolerance, value > tolerance, ">"); }

inline void write_outputs(const Outputs& o, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "summary.json") << to_json_text(o.summary);
    for (const auto& [name, table] : o.tables) std::ofstream(dir / name) << table.text();
}

}  // namespace nonlocalqm::cli
