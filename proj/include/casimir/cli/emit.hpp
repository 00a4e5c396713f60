#pragma once

// Result tables and their CSV / JSON-lines encodings.

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "casimir/cli/config.hpp"
#include "casimir/error.hpp"

namespace casimir::cli {

/// Columns are fixed for a run; the column named "converged" holds 0 or 1.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw ValidationError("no column '" + name + "'");
    }
    bool has(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }
    bool all_converged() const {
        if (!has("converged")) return true;
        const auto c = column("converged");
        for (const auto& r : rows)
            if (r[c] != 1.0) return false;
        return true;
    }
};

inline std::string format_value(const std::string& column, double v) {
    if (column == "converged") return v == 1.0 ? "1" : "0";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline void emit_csv(const Table& t, std::ostream& out) {
    if (t.rows.empty()) throw ValidationError("no rows to emit");
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_value(t.columns[i], r[i]);
        out << '\n';
    }
    if (!out) throw Error("write failed");
}

inline void emit_jsonl(const Table& t, std::ostream& out) {
    if (t.rows.empty()) throw ValidationError("no rows to emit");
    for (const auto& r : t.rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (t.columns[i] == "converged") o[t.columns[i]] = r[i] == 1.0;
            else if (std::isnan(r[i])) o[t.columns[i]] = nullptr;
            else o[t.columns[i]] = r[i];
        }
        out << o.dump() << '\n';
    }
    if (!out) throw Error("write failed");
}

inline void emit(const Table& t, Format f, std::ostream& out) {
    f == Format::csv ? emit_csv(t, out) : emit_jsonl(t, out);
}

inline Table parse_csv(std::istream& in) {
    Table t;
    std::string line;
    int lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(tok);
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.columns.empty()) {
            t.columns = split(line);
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.columns.size()) throw ParseError("wrong number of fields", lineno);
        std::vector<double> row;
        for (const auto& c : cells) {
            if (c == "nan") {
                row.push_back(std::nan(""));
                continue;
            }
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(c, &used);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + c + "'", lineno);
            }
            if (used != c.size()) throw ParseError("malformed number '" + c + "'", lineno);
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) throw ParseError("missing header", 0);
    return t;
}

inline Table parse_jsonl(std::istream& in) {
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::ordered_json o;
        try {
            o = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what(), lineno);
        }
        if (!o.is_object()) throw ParseError("expected an object", lineno);
        std::vector<std::string> cols;
        std::vector<double> row;
        for (const auto& [k, v] : o.items()) {
            cols.push_back(k);
            if (v.is_boolean()) row.push_back(v.get<bool>() ? 1.0 : 0.0);
            else if (v.is_null()) row.push_back(std::nan(""));
            else if (v.is_number()) row.push_back(v.get<double>());
            else throw ParseError("non-numeric value for '" + k + "'", lineno);
        }
        if (t.columns.empty()) t.columns = cols;
        else if (cols != t.columns) throw ParseError("keys differ from the first row", lineno);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace casimir::cli
