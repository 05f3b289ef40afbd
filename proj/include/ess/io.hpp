// Artifact plumbing: deterministic CSV tables, atomic file writes, content
// hashing, and the per-run manifest.  CSV dialect: comma separator, '.'
// decimal point, one header row, LF line endings, reals at 17 significant
// digits so values round-trip exactly.
#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ess/common.hpp"
#include "ess/grid.hpp"

namespace ess {

inline constexpr const char* code_version = "0.1.0";

// ---------------------------------------------------------------------------
// Atomic writes: stage to <path>.tmp, then rename over the destination.

inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw SolverError("cannot open for write: " + tmp.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw SolverError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Content hashing (FNV-1a over the canonical text) for config identity.

inline std::uint64_t hash_text(std::string_view s) {
    return fnv1a64(std::span<const char>(s.data(), s.size()));
}

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV tables.

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    bool has_column(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw ConfigError("csv: missing column '" + name + "'");
    }

    std::vector<double> column(const std::string& name) const {
        const std::size_t k = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }
};

inline std::string csv_to_string(const CsvTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw SolverError("csv: ragged row");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_real(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
    atomic_write_text(path, csv_to_string(t));
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open csv: " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) t.columns.push_back(cell);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("csv: non-numeric cell '" + cell + "' in " + path.string());
            }
        }
        if (row.size() != t.columns.size())
            throw ConfigError("csv: row width mismatch in " + path.string());
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Raw grid-field dumps (little-endian doubles with a small fixed header);
// used for terminal states and abort diagnostics.

inline void write_field_binary(const std::filesystem::path& path, const ScalarField& f) {
    std::string buf;
    buf.reserve(48 + f.v.size() * sizeof(double));
    buf.append("ESSFLD01", 8);
    auto put = [&buf](const void* p, std::size_t n) {
        buf.append(static_cast<const char*>(p), n);
    };
    const std::int64_t nx = f.grid.nx, ny = f.grid.ny;
    put(&nx, 8);
    put(&ny, 8);
    put(&f.grid.x0, 8);
    put(&f.grid.y0, 8);
    put(&f.grid.h, 8);
    put(f.v.data(), f.v.size() * sizeof(double));
    atomic_write_text(path, buf);
}

inline ScalarField read_field_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open field dump: " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string_view(magic, 8) != "ESSFLD01")
        throw ConfigError("bad field dump header: " + path.string());
    std::int64_t nx = 0, ny = 0;
    Grid g;
    is.read(reinterpret_cast<char*>(&nx), 8);
    is.read(reinterpret_cast<char*>(&ny), 8);
    is.read(reinterpret_cast<char*>(&g.x0), 8);
    is.read(reinterpret_cast<char*>(&g.y0), 8);
    is.read(reinterpret_cast<char*>(&g.h), 8);
    if (!is || nx <= 0 || ny <= 0 || nx > (1 << 20) || ny > (1 << 20))
        throw ConfigError("bad field dump dimensions: " + path.string());
    g.nx = static_cast<int>(nx);
    g.ny = static_cast<int>(ny);
    ScalarField f(g);
    is.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!is) throw ConfigError("truncated field dump: " + path.string());
    return f;
}

// ---------------------------------------------------------------------------
// Run manifest: who ran, on what config, what came out.  Written atomically
// once at the end of a run; timestamps are wall-clock UTC and deliberately
// live here rather than in any CSV so data artifacts stay byte-reproducible.

struct SuiteStatus {
    std::string name;
    bool passed = false;
};

struct RunManifest {
    std::string config_hash;
    std::string version = code_version;
    std::string started_at;
    std::string finished_at;
    std::vector<SuiteStatus> suites;
    std::vector<std::string> files;

    void add_file(const std::filesystem::path& p) { files.push_back(p.filename().string()); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config_hash"] = config_hash;
        j["code_version"] = version;
        j["started_at"] = started_at;
        j["finished_at"] = finished_at;
        nlohmann::json s = nlohmann::json::array();
        for (const auto& st : suites) s.push_back({{"name", st.name}, {"passed", st.passed}});
        j["suites"] = s;
        j["files"] = files;
        return j;
    }
};

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    atomic_write_text(path, m.to_json().dump(2) + "\n");
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open manifest: " + path.string());
    nlohmann::json j;
    is >> j;
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.at("code_version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    for (const auto& s : j.at("suites"))
        m.suites.push_back({s.at("name").get<std::string>(), s.at("passed").get<bool>()});
    for (const auto& f : j.at("files")) m.files.push_back(f.get<std::string>());
    return m;
}

}  // namespace ess
