#pragma once

// Separation sweeps behind the pp, theta1 and profile subcommands.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <string>
#include <vector>

#include "casimir/cli/config.hpp"
#include "casimir/cli/emit.hpp"
#include "casimir/geometry.hpp"
#include "casimir/kernel.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/surface_scattering.hpp"

namespace casimir::cli {

enum class Command { pp, theta1, profile };

inline std::string command_name(Command c) {
    switch (c) {
        case Command::pp: return "pp";
        case Command::theta1: return "theta1";
        case Command::profile: return "profile";
    }
    return "";
}

struct SweepResult {
    Table table;
    std::vector<std::string> summary;
    std::vector<std::string> messages;
};

inline GeometryOptions geometry_options(const RunConfig& c) {
    GeometryOptions g;
    g.lifshitz.rel_tol = c.rel_tol;
    g.lifshitz.sum_tol = c.sum_tol;
    g.kernel.sum_tol = c.sum_tol;
    g.kernel.lifshitz = g.lifshitz;
    g.kernel.threads = 1;
    return g;
}

inline std::vector<std::string> sweep_columns(Command cmd, const RunConfig& c) {
    std::vector<std::string> cols{"d_nm"};
    if (c.temperature > 0.0) cols.push_back("log10_2pi_d_over_lambda_T");
    switch (cmd) {
        case Command::pp:
            for (const char* k : {"free_energy", "free_energy_error", "force", "force_error"}) cols.push_back(k);
            break;
        case Command::theta1:
            for (const char* k : {"free_energy", "force", "beta", "theta1", "theta1_error", "gamma_deviation"})
                cols.push_back(k);
            break;
        case Command::profile:
            for (const char* k : {"radius_nm", "pfa_energy", "pfa_tail", "gradient_correction",
                                  "gradient_correction_error", "interpolation_error", "total_energy"})
                cols.push_back(k);
            break;
    }
    cols.push_back("converged");
    if (c.timing) cols.push_back("wall_time_s");
    return cols;
}

namespace detail {

inline std::vector<double> pp_row(const PlatePair& pair, double d, const GeometryOptions& g) {
    const auto e = free_energy_pp(pair, d, g.lifshitz);
    const auto f = force_pp(pair, d, g.lifshitz);
    return {e.value, e.error, f.value, f.error, (e.converged && f.converged) ? 1.0 : 0.0};
}

inline std::vector<double> theta1_row(const PlatePair& pair, const KernelProvider& prov, double d, double c1,
                                      const GeometryOptions& g) {
    const auto t = theta1(pair, prov, d, c1, g);
    return {t.free_energy, t.force, t.beta, t.theta1, t.error, t.coefficients.gamma_deviation,
            t.converged ? 1.0 : 0.0};
}

inline std::vector<double> profile_row(const PlatePair& pair, const KernelProvider& prov, double d,
                                       const RunConfig& c, const GeometryOptions& g) {
    AxisymmetricProfile prof{d, c.radius, c.c1, {}};
    const auto p = pfa_free_energy(pair, prof, g);
    const auto q = gradient_correction(pair, prov, prof, nullptr, g);
    return {c.radius, p.value, p.tail, q.value, q.error, q.interpolation_error, p.value + q.value,
            (p.converged && q.converged) ? 1.0 : 0.0};
}

}  // namespace detail

inline SweepResult run_sweep(Command cmd, const RunConfig& c, const std::shared_ptr<const OpticalTable>& table = {}) {
    c.validate();
    const PlatePair pair = make_pair(c, table);
    const KernelProvider prov(pair.material1);
    const GeometryOptions g = geometry_options(c);
    const auto ds = c.separations();
    SweepResult out;
    out.table.columns = sweep_columns(cmd, c);
    out.table.rows.resize(ds.size());
    std::mutex mu;
    const std::size_t width = out.table.columns.size();
    parallel_for(static_cast<long>(ds.size()), c.threads, [&](long i) {
        const auto t0 = std::chrono::steady_clock::now();
        const double d = ds[i];
        std::vector<double> row{d};
        if (c.temperature > 0.0) row.push_back(std::log10(2.0 * units::pi * d / units::thermal_wavelength(c.temperature)));
        std::vector<double> body;
        try {
            switch (cmd) {
                case Command::pp: body = detail::pp_row(pair, d, g); break;
                case Command::theta1: body = detail::theta1_row(pair, prov, d, c.c1, g); break;
                case Command::profile: body = detail::profile_row(pair, prov, d, c, g); break;
            }
        } catch (const Error& e) {
            const std::size_t n = width - row.size() - (c.timing ? 1 : 0);
            body.assign(n, std::nan(""));
            body.back() = 0.0;
            std::lock_guard lock(mu);
            char buf[64];
            std::snprintf(buf, sizeof buf, "d = %.6g nm: ", d);
            out.messages.push_back(buf + std::string(e.what()));
        }
        row.insert(row.end(), body.begin(), body.end());
        if (c.timing) row.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        out.table.rows[i] = std::move(row);
    });
    std::sort(out.messages.begin(), out.messages.end());
    return out;
}

/// Endpoint values for a quick comparison with known limits.
inline std::vector<std::string> summarize(Command cmd, const Table& t) {
    std::vector<std::string> lines;
    if (t.rows.empty()) return lines;
    const std::string key = cmd == Command::pp ? "force" : cmd == Command::theta1 ? "theta1" : "total_energy";
    const auto dc = t.column("d_nm"), vc = t.column(key);
    char buf[160];
    for (const auto* r : {&t.rows.front(), &t.rows.back()}) {
        std::snprintf(buf, sizeof buf, "%s(d = %.6g nm) = %.9g", key.c_str(), (*r)[dc], (*r)[vc]);
        lines.push_back(buf);
    }
    if (cmd == Command::theta1) {
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& r : t.rows) {
            if (r[dc] < 164.0 || r[dc] > 300.0 || std::isnan(r[vc])) continue;
            lo = any ? std::min(lo, r[vc]) : r[vc];
            hi = any ? std::max(hi, r[vc]) : r[vc];
            any = true;
        }
        if (any) {
            std::snprintf(buf, sizeof buf, "theta1 over 164-300 nm: [%.6g, %.6g]", lo, hi);
            lines.push_back(buf);
        }
    }
    return lines;
}

}  // namespace casimir::cli
