// casimir: parallel-plate Casimir quantities, the theta1 curvature correction
// and profile functionals over separation sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "casimir/cli/acceptance.hpp"
#include "casimir/cli/cache.hpp"
#include "casimir/cli/config.hpp"
#include "casimir/cli/emit.hpp"
#include "casimir/cli/sweep.hpp"

#ifndef CASIMIR_DATA_DIR
#define CASIMIR_DATA_DIR "data"
#endif

namespace {

using namespace casimir;
using namespace casimir::cli;

struct SweepFlags {
    std::string config_file, output, cache_dir;
    bool no_cache = false;
    std::map<std::string, std::string> values;
    bool timing = false;
};

void add_sweep_options(CLI::App* app, SweepFlags& f) {
    app->add_option("-c,--config", f.config_file, "key = value config file; flags override its settings");
    auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            flag, [&f, key](const std::string& v) { f.values[key] = v; }, help);
    };
    opt("--material", "material",
        "both bodies: gold-drude, perfect, drude:W,G, plasma:W, constant:EPS, tabulated (default gold-drude)");
    opt("--material1", "material1", "curved body material");
    opt("--material2", "material2", "flat plate material");
    opt("--optical-file", "optical_file", "two-column table (eV, Im eps) for tabulated materials");
    opt("-T,--temperature", "temperature", "kelvin, or 'zero' (default 300)");
    opt("--geometry", "geometry", "sphere (c1 = 1/4) or paraboloid (c1 = 0)");
    opt("--c1", "c1", "quartic profile coefficient (default 0.25)");
    opt("--radius", "radius", "curvature radius in nm for the profile command (default 1e5)");
    opt("--d-min", "d_min", "smallest separation in nm (default 10)");
    opt("--d-max", "d_max", "largest separation in nm (default 10000)");
    opt("--points", "points", "number of separations (default 40)");
    opt("--spacing", "spacing", "log or linear (default log)");
    opt("--rel-tol", "rel_tol", "quadrature tolerance (default 1e-8)");
    opt("--sum-tol", "sum_tol", "Matsubara sum tolerance (default 1e-7)");
    opt("--format", "format", "csv or jsonl (default csv)");
    opt("-j,--threads", "threads", "worker threads (default 1)");
    app->add_flag("--timing", f.timing, "add a wall_time_s column");
    app->add_option("-o,--output", f.output, "output file (default stdout)");
    app->add_option("--cache-dir", f.cache_dir, "result cache directory");
    app->add_flag("--no-cache", f.no_cache, "ignore the cache even if --cache-dir is given");
}

RunConfig build_config(const SweepFlags& f) {
    ConfigBuilder b;
    if (!f.config_file.empty()) b.read_file(f.config_file);
    ConfigBuilder flags;
    for (const auto& [k, v] : f.values) flags.set(k, v);
    if (f.timing) flags.set("timing", "1");
    b.merge(flags);
    return b.finish();
}

int run(Command cmd, const SweepFlags& f) {
    const RunConfig cfg = build_config(f);
    std::optional<ResultCache> cache;
    std::string key;
    if (!f.cache_dir.empty() && !f.no_cache) {
        cache.emplace(f.cache_dir);
        key = cache_key(command_name(cmd), cfg);
    }
    std::optional<Table> table;
    if (cache) table = cache->load(key);
    if (!table) {
        const auto res = run_sweep(cmd, cfg, load_table(cfg));
        for (const auto& m : res.messages) std::cerr << "warning: " << m << '\n';
        table = res.table;
        if (cache) cache->store(key, *table);
    }
    for (const auto& line : summarize(cmd, *table)) std::cerr << line << '\n';
    if (f.output.empty()) {
        emit(*table, cfg.format, std::cout);
    } else {
        std::ofstream out(f.output);
        if (!out) throw Error("cannot open output file '" + f.output + "'");
        emit(*table, cfg.format, out);
    }
    if (!table->all_converged()) {
        std::cerr << "error: some rows did not converge\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Casimir free energies, forces and curvature corrections"};
    app.require_subcommand(1);

    SweepFlags pp_flags, theta_flags, profile_flags;
    auto* pp = app.add_subcommand("pp", "parallel plates: free energy and force per unit area against d");
    add_sweep_options(pp, pp_flags);
    auto* th = app.add_subcommand("theta1", "beta and theta1 against d");
    add_sweep_options(th, theta_flags);
    auto* pr = app.add_subcommand("profile", "PFA and gradient-correction energies of an axisymmetric profile");
    add_sweep_options(pr, profile_flags);

    auto* val = app.add_subcommand("validate", "run the reference checks");
    bool full = false;
    CheckContext ctx;
    ctx.optical_table = std::string(CASIMIR_DATA_DIR) + "/gold_drude_synthetic.txt";
    val->add_flag("--full", full, "run every check (several minutes)");
    val->add_option("--table", ctx.optical_table, "synthetic Drude table for the Kramers-Kronig check");
    val->add_option("--output-dir", ctx.output_dir, "directory for CSV files written by the checks");
    val->add_option("-j,--threads", ctx.threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pp->parsed()) return run(Command::pp, pp_flags);
        if (th->parsed()) return run(Command::theta1, theta_flags);
        if (pr->parsed()) return run(Command::profile, profile_flags);
        bool ok = true;
        run_checks(ctx, !full, [&](const CheckResult& r) {
            std::cout << format_check(r) << std::endl;
            ok = ok && r.pass;
        });
        return ok ? 0 : 1;
    } catch (const casimir::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
