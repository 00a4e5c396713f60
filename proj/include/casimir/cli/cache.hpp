#pragma once

// Content-addressed result cache. Each entry is <dir>/<sha256>.json where the
// digest covers the library version, the canonical config and the digests of
// every input file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>
#include <openssl/evp.h>

#include "casimir/cli/config.hpp"
#include "casimir/cli/emit.hpp"

namespace casimir::cli {

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

inline std::string cache_key(const std::string& command, const RunConfig& c) {
    std::string text = std::string("version=") + version + "\ncommand=" + command + "\n" + c.canonical();
    if (!c.optical_file.empty()) text += "optical_digest=" + file_digest(c.optical_file) + "\n";
    return sha256_hex(text);
}

class ResultCache {
  public:
    explicit ResultCache(std::filesystem::path dir, std::ostream& log = std::cerr) : dir_(std::move(dir)), log_(&log) {}

    std::filesystem::path path(const std::string& key) const { return dir_ / (key + ".json"); }

    /// The stored table, or nothing on a miss. Corrupt or stale entries are
    /// reported and treated as misses.
    std::optional<Table> load(const std::string& key) const {
        const auto p = path(key);
        if (!std::filesystem::exists(p)) return std::nullopt;
        try {
            std::ifstream in(p);
            const auto j = nlohmann::json::parse(in);
            if (j.at("version").get<std::string>() != version) return std::nullopt;
            if (j.at("key").get<std::string>() != key) throw Error("key mismatch");
            Table t;
            t.columns = j.at("columns").get<std::vector<std::string>>();
            for (const auto& r : j.at("rows")) {
                std::vector<double> row;
                for (const auto& v : r) row.push_back(v.is_null() ? std::nan("") : v.get<double>());
                if (row.size() != t.columns.size()) throw Error("row width mismatch");
                t.rows.push_back(std::move(row));
            }
            if (t.rows.empty()) throw Error("no rows");
            return t;
        } catch (const std::exception& e) {
            *log_ << "warning: corrupt cache entry " << p.string() << " (" << e.what() << "); recomputing\n";
            return std::nullopt;
        }
    }

    void store(const std::string& key, const Table& t) const {
        std::filesystem::create_directories(dir_);
        nlohmann::json j;
        j["version"] = version;
        j["key"] = key;
        j["columns"] = t.columns;
        j["rows"] = nlohmann::json::array();
        for (const auto& r : t.rows) {
            nlohmann::json row = nlohmann::json::array();
            for (double v : r) row.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
            j["rows"].push_back(row);
        }
        const auto p = path(key);
        const auto tmp = p.string() + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw Error("cannot write cache entry '" + tmp + "'");
            out << j.dump() << '\n';
            if (!out) throw Error("cannot write cache entry '" + tmp + "'");
        }
        std::filesystem::rename(tmp, p);
    }

  private:
    std::filesystem::path dir_;
    std::ostream* log_;
};

}  // namespace casimir::cli
