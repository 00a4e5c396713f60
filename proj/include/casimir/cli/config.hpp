#pragma once

// Run configuration for the command-line front end: key=value files,
// material specs and the separation grid.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "casimir/dielectric.hpp"
#include "casimir/error.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/units.hpp"

namespace casimir::cli {

inline constexpr const char* version = "1.0.0";

enum class Spacing { log, linear };
enum class Format { csv, jsonl };

struct RunConfig {
    std::string material1 = "gold-drude";
    std::string material2 = "gold-drude";
    std::string optical_file;
    double temperature = 300.0;
    double c1 = 0.25;
    double radius = 1e5;
    double d_min = 10.0;
    double d_max = 10000.0;
    int points = 40;
    Spacing spacing = Spacing::log;
    double rel_tol = 1e-8;
    double sum_tol = 1e-7;
    Format format = Format::csv;
    int threads = 1;
    bool timing = false;

    void validate() const;
    std::vector<double> separations() const;
    /// Sorted key=value lines of every setting that affects results.
    std::string canonical() const;
};

/// Keys accepted in config files and their flag equivalents.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "material", "material1", "material2", "optical_file", "temperature", "geometry", "c1", "radius",
        "d_min",    "d_max",     "points",    "spacing",      "rel_tol",     "sum_tol",  "format", "threads",
        "timing"};
    return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ValidationError("invalid number for " + key + ": '" + v + "'");
    return x;
}

inline int to_int(const std::string& key, const std::string& v) {
    int x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ValidationError("invalid integer for " + key + ": '" + v + "'");
    return x;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<double> numbers_after(const std::string& spec, const std::string& prefix) {
    std::vector<double> out;
    std::stringstream ss(spec.substr(prefix.size()));
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_double(spec, trim(tok)));
    return out;
}

}  // namespace detail

/// Supported material specs: gold-drude, perfect, drude:<plasma>,<damping>,
/// plasma:<plasma>, constant:<eps>, tabulated (needs optical_file; Drude gold
/// extrapolation below the table).
inline void check_material_spec(const std::string& spec) {
    const std::string s = detail::lower(spec);
    auto count = [&](const std::string& prefix, std::size_t n) {
        if (detail::numbers_after(s, prefix).size() != n)
            throw ValidationError("material '" + spec + "' needs " + std::to_string(n) + " parameter(s)");
    };
    if (s == "gold-drude" || s == "perfect" || s == "tabulated") return;
    if (s.rfind("drude:", 0) == 0) return count("drude:", 2);
    if (s.rfind("plasma:", 0) == 0) return count("plasma:", 1);
    if (s.rfind("constant:", 0) == 0) return count("constant:", 1);
    throw ValidationError("unknown material '" + spec +
                          "' (expected gold-drude, perfect, drude:W,G, plasma:W, constant:EPS or tabulated)");
}

inline PermittivityModel make_model(const std::string& spec, const std::shared_ptr<const OpticalTable>& table) {
    check_material_spec(spec);
    const std::string s = detail::lower(spec);
    PermittivityModel m;
    if (s == "gold-drude") m = gold_drude();
    else if (s == "perfect") m = PerfectConductor{};
    else if (s == "tabulated") {
        if (!table) throw ValidationError("tabulated material needs optical_file");
        m = Tabulated{table, gold_drude()};
    } else if (s.rfind("drude:", 0) == 0) {
        const auto v = detail::numbers_after(s, "drude:");
        m = Drude{v[0], v[1]};
    } else if (s.rfind("plasma:", 0) == 0) {
        m = Plasma{detail::numbers_after(s, "plasma:")[0]};
    } else {
        m = Constant{detail::numbers_after(s, "constant:")[0]};
    }
    validate(m);
    return m;
}

inline void RunConfig::validate() const {
    check_material_spec(material1);
    check_material_spec(material2);
    const bool tab = detail::lower(material1) == "tabulated" || detail::lower(material2) == "tabulated";
    if (tab && optical_file.empty()) throw ValidationError("tabulated material needs optical_file");
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ValidationError("temperature must be >= 0");
    if (!std::isfinite(c1)) throw ValidationError("c1 must be finite");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("radius must be > 0");
    if (points < 1) throw ValidationError("points must be >= 1");
    if (!(d_min > 0.0) || !std::isfinite(d_min)) throw ValidationError("d_min must be > 0");
    if (points > 1 && !(d_max > d_min)) throw ValidationError("d_max must exceed d_min");
    if (!std::isfinite(d_max)) throw ValidationError("d_max must be finite");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ValidationError("rel_tol must lie in (0, 1)");
    if (!(sum_tol > 0.0 && sum_tol < 1.0)) throw ValidationError("sum_tol must lie in (0, 1)");
    if (threads < 1) throw ValidationError("threads must be >= 1");
}

inline std::vector<double> RunConfig::separations() const {
    std::vector<double> d;
    if (points == 1) return {d_min};
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        d.push_back(spacing == Spacing::log ? d_min * std::pow(d_max / d_min, t) : d_min + (d_max - d_min) * t);
    }
    d.back() = d_max;
    return d;
}

inline std::string RunConfig::canonical() const {
    std::map<std::string, std::string> kv{
        {"c1", detail::fmt(c1)},
        {"d_max", detail::fmt(points == 1 ? d_min : d_max)},
        {"d_min", detail::fmt(d_min)},
        {"format", format == Format::csv ? "csv" : "jsonl"},
        {"material1", detail::lower(material1)},
        {"material2", detail::lower(material2)},
        {"points", std::to_string(points)},
        {"radius", detail::fmt(radius)},
        {"rel_tol", detail::fmt(rel_tol)},
        {"spacing", spacing == Spacing::log ? "log" : "linear"},
        {"sum_tol", detail::fmt(sum_tol)},
        {"temperature", detail::fmt(temperature)},
        {"timing", timing ? "1" : "0"},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

/// Applies one key=value setting. Used for config files and flags alike.
/// `material` sets both bodies; setting it together with material1/material2
/// to a different value is rejected by `finish`.
class ConfigBuilder {
  public:
    void set(const std::string& raw_key, const std::string& raw_value) {
        const std::string key = detail::lower(detail::trim(raw_key));
        const std::string v = detail::trim(raw_value);
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
            std::string valid;
            for (const auto& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
            throw ValidationError("unknown key '" + raw_key + "'; valid keys: " + valid);
        }
        values_[key] = v;
    }

    /// Parses key=value lines; '#' starts a comment.
    void read(std::istream& in) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
            try {
                set(line.substr(0, eq), line.substr(eq + 1));
            } catch (const ValidationError& e) {
                throw ParseError(e.what(), lineno);
            }
        }
    }

    void read_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config file '" + path + "'");
        try {
            read(in);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), 0);
        }
    }

    /// Later layers override earlier ones.
    void merge(const ConfigBuilder& over) {
        for (const auto& [k, v] : over.values_) values_[k] = v;
    }

    RunConfig finish() const {
        RunConfig c;
        auto get = [&](const std::string& k) -> std::optional<std::string> {
            const auto it = values_.find(k);
            if (it == values_.end()) return std::nullopt;
            return it->second;
        };
        if (auto m = get("material")) {
            for (const char* k : {"material1", "material2"})
                if (auto mk = get(k); mk && detail::lower(*mk) != detail::lower(*m))
                    throw ValidationError(std::string("conflicting material specs: material=") + *m + " and " + k +
                                          "=" + *mk);
            c.material1 = c.material2 = *m;
        }
        if (auto m = get("material1")) c.material1 = *m;
        if (auto m = get("material2")) c.material2 = *m;
        if (auto v = get("optical_file")) c.optical_file = *v;
        if (auto v = get("temperature")) {
            c.temperature = detail::lower(*v) == "zero" ? 0.0 : detail::to_double("temperature", *v);
        }
        std::optional<double> c1_geom;
        if (auto v = get("geometry")) {
            const std::string g = detail::lower(*v);
            if (g == "sphere") c1_geom = 0.25;
            else if (g == "paraboloid") c1_geom = 0.0;
            else throw ValidationError("geometry must be sphere or paraboloid");
        }
        if (auto v = get("c1")) {
            c.c1 = detail::to_double("c1", *v);
            if (c1_geom && *c1_geom != c.c1) throw ValidationError("conflicting geometry and c1 settings");
        } else if (c1_geom) {
            c.c1 = *c1_geom;
        }
        if (auto v = get("radius")) c.radius = detail::to_double("radius", *v);
        if (auto v = get("d_min")) c.d_min = detail::to_double("d_min", *v);
        if (auto v = get("d_max")) c.d_max = detail::to_double("d_max", *v);
        if (auto v = get("points")) c.points = detail::to_int("points", *v);
        if (auto v = get("spacing")) {
            const std::string s = detail::lower(*v);
            if (s == "log") c.spacing = Spacing::log;
            else if (s == "linear") c.spacing = Spacing::linear;
            else throw ValidationError("spacing must be log or linear");
        }
        if (auto v = get("rel_tol")) c.rel_tol = detail::to_double("rel_tol", *v);
        if (auto v = get("sum_tol")) c.sum_tol = detail::to_double("sum_tol", *v);
        if (auto v = get("format")) {
            const std::string s = detail::lower(*v);
            if (s == "csv") c.format = Format::csv;
            else if (s == "jsonl" || s == "json-lines") c.format = Format::jsonl;
            else throw ValidationError("format must be csv or jsonl");
        }
        if (auto v = get("threads")) c.threads = detail::to_int("threads", *v);
        if (auto v = get("timing")) {
            const std::string s = detail::lower(*v);
            c.timing = s == "1" || s == "true" || s == "yes";
            if (!c.timing && s != "0" && s != "false" && s != "no") throw ValidationError("timing must be a boolean");
        }
        c.validate();
        return c;
    }

  private:
    std::map<std::string, std::string> values_;
};

inline RunConfig parse_config(std::istream& in) {
    ConfigBuilder b;
    b.read(in);
    return b.finish();
}

/// Loads the optical table if the config needs one.
inline std::shared_ptr<const OpticalTable> load_table(const RunConfig& c) {
    if (c.optical_file.empty()) return nullptr;
    std::ifstream in(c.optical_file);
    if (!in) throw ValidationError("cannot open optical file '" + c.optical_file + "'");
    try {
        return std::make_shared<const OpticalTable>(load_optical_table(in));
    } catch (const ParseError& e) {
        throw ParseError(c.optical_file + ": " + e.what(), 0);
    } catch (const ValidationError& e) {
        throw ValidationError(c.optical_file + ": " + e.what());
    }
}

inline PlatePair make_pair(const RunConfig& c, const std::shared_ptr<const OpticalTable>& table) {
    return PlatePair{Material(make_model(c.material1, table)), Material(make_model(c.material2, table)),
                     c.temperature};
}

}  // namespace casimir::cli
