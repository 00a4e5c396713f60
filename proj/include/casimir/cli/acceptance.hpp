#pragma once

// Reference checks against closed forms and known limits. Shared by the
// acceptance test binary and the `validate` subcommand.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "casimir/cli/config.hpp"
#include "casimir/cli/emit.hpp"
#include "casimir/cli/sweep.hpp"
#include "casimir/geometry.hpp"

namespace casimir::cli {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct CheckContext {
    std::string optical_table;  // synthetic Drude table for the KK check
    std::string output_dir = ".";
    int threads = 1;
};

namespace checks {

inline std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

inline PlatePair pc_pair(double T = 0.0) { return {PerfectConductor{}, PerfectConductor{}, T}; }
inline PlatePair gold_pair(double T) { return {gold_drude(), gold_drude(), T}; }
inline double pc_coefficient() { return units::pi * units::pi * units::hbar_c / 720.0; }
inline double beta_em() { return 2.0 / 3.0 * (1.0 - 15.0 / (units::pi * units::pi)); }

inline GeometryOptions options(const CheckContext& ctx) {
    GeometryOptions g;
    g.kernel.threads = ctx.threads;
    return g;
}

inline CheckResult ideal_lifshitz(const CheckContext&) {
    CheckResult r{1, "ideal Lifshitz law", false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double d : {50.0, 200.0, 1000.0}) {
        const double exact = -pc_coefficient() / (d * d * d);
        worst = std::max(worst, std::abs(free_energy_pp(pc_pair(), d).value / exact - 1.0));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = worst < 1e-6 && secs < 1.0;
    r.detail = fmt("max relative deviation %.2e (tol 1e-6), %.3f s (limit 1 s)", worst, secs);
    return r;
}

inline CheckResult gamma_check(const CheckContext& ctx) {
    CheckResult r{2, "gamma check G(0) = F''/2", false, "", 0.0};
    const std::vector<std::pair<std::string, PermittivityModel>> models{
        {"perfect", PerfectConductor{}}, {"constant:10", Constant{10.0}}, {"gold-drude", gold_drude()}};
    double worst = 0.0;
    std::string where;
    KernelOptions opt;
    opt.threads = ctx.threads;
    for (const auto& [name, m] : models)
        for (double T : {0.0, 300.0})
            for (double d : {100.0, 500.0}) {
                const PlatePair pair{m, m, T};
                const KernelProvider prov(pair.material1);
                const double g = kernel_G(prov, pair, 0.0, d, opt);
                const double ref = 0.5 * d2_free_energy_pp(pair, d).value;
                const double dev = std::abs(g / ref - 1.0);
                if (dev >= worst) {
                    worst = dev;
                    where = fmt("%s T=%g d=%g", name.c_str(), T, d);
                }
            }
    r.pass = worst < 1e-5;
    r.detail = fmt("max relative deviation %.2e at %s (tol 1e-5)", worst, where.c_str());
    return r;
}

inline CheckResult exact_beta(const CheckContext& ctx) {
    CheckResult r{3, "perfect conductor beta and theta1", false, "", 0.0};
    const PlatePair pair = pc_pair();
    const KernelProvider prov(pair.material1);
    const auto t = theta1(pair, prov, 100.0, 0.25, options(ctx));
    const double db = std::abs(t.beta - beta_em()), dt = std::abs(t.theta1 - (-0.564));
    r.pass = db < 1e-3 && dt < 1e-3 && t.converged;
    r.detail = fmt("beta %.6f (exact %.6f), theta1 %.6f (expected -0.564)", t.beta, beta_em(), t.theta1);
    return r;
}

inline CheckResult high_temperature(const CheckContext& ctx) {
    CheckResult r{4, "classical high-temperature limit", false, "", 0.0};
    const PlatePair pair = gold_pair(300.0);
    const KernelProvider prov(pair.material1);
    const double d = 10.0 * units::thermal_wavelength(300.0);
    const auto t = theta1(pair, prov, d, 0.25, options(ctx));
    const double target = 1.0 / (12.0 * units::zeta3);
    const double rel = std::abs(t.theta1 / target - 1.0);
    r.pass = rel < 0.02 && t.converged;
    r.detail = fmt("theta1(d = %.0f nm) = %.6f, target %.6f, relative deviation %.2e (tol 0.02)", d, t.theta1, target,
                   rel);
    return r;
}

inline CheckResult short_distance(const CheckContext& ctx) {
    CheckResult r{5, "non-retarded endpoint", false, "", 0.0};
    const PlatePair pair = gold_pair(300.0);
    const KernelProvider prov(pair.material1);
    const auto lim = theta1_small_distance(pair, prov, 0.25, 20.0, 3, options(ctx));
    r.pass = std::abs(lim.value - (-0.206)) < 0.01 && lim.converged;
    r.detail = fmt("theta1(20, 10, 5 nm) = %.4f, %.4f, %.4f, extrapolated %.4f +- %.4f (target -0.206 +- 0.01)",
                   lim.points[0].theta1, lim.points[1].theta1, lim.points[2].theta1, lim.value, lim.error);
    return r;
}

inline CheckResult thermal_sensitivity(const CheckContext& ctx) {
    CheckResult r{6, "thermal sensitivity at 200 nm", false, "", 0.0};
    const double d = 200.0;
    const PlatePair hot = gold_pair(300.0), cold = gold_pair(0.0);
    const KernelProvider prov(hot.material1);
    const auto th = theta1(hot, prov, d, 0.25, options(ctx));
    const auto tc = theta1(cold, prov, d, 0.25, options(ctx));
    const double ratio = std::abs(th.theta1 - tc.theta1) / std::abs(th.theta1);
    const double de = std::abs(th.free_energy - tc.free_energy) / std::abs(tc.free_energy);
    const double df = std::abs(th.force - tc.force) / std::abs(tc.force);
    r.pass = std::abs(ratio - 0.20) <= 0.05 && de < 0.03;
    r.detail = fmt("theta1 300 K %.4f, 0 K %.4f, ratio %.3f (0.20 +- 0.05); free energy change %.4f (< 0.03); "
                   "force change %.4f",
                   th.theta1, tc.theta1, ratio, de, df);
    return r;
}

inline CheckResult quadratic_kernel(const CheckContext& ctx) {
    CheckResult r{7, "quadratic kernel at small k", false, "", 0.0};
    const double d = 200.0;
    const PlatePair pair = gold_pair(300.0);
    const KernelProvider prov(pair.material1);
    KernelOptions opt;
    opt.threads = ctx.threads;
    const KernelEvaluator ev(prov, pair, d, opt);
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        const double k = 0.01 * std::pow(10.0, i / 9.0) / d;
        x.push_back(k * k);
        y.push_back(ev.G(k));
    }
    // Least squares y = a + b x, with the offset taken relative to gamma.
    const double n = static_cast<double>(x.size());
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yi = y[i] - ev.gamma();
        sx += x[i];
        sxx += x[i] * x[i];
        sy += yi;
        sxy += x[i] * yi;
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx), a = (sy - b * sx) / n;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(y[i] - ev.gamma() - a - b * x[i]) / std::abs(b * x[i]));
    r.pass = worst < 1e-3;
    r.detail = fmt("max residual / (delta k^2) = %.3e over k d in [0.01, 0.1] (tol 1e-3); G/k^2 at the ends %.6e, %.6e",
                   worst, (y.front() - ev.gamma()) / x.front(), (y.back() - ev.gamma()) / x.back());
    return r;
}

inline CheckResult scaling(const CheckContext& ctx) {
    CheckResult r{8, "scaling of gamma and delta", false, "", 0.0};
    KernelOptions opt;
    opt.threads = ctx.threads;
    const PlatePair pc = pc_pair();
    const KernelProvider ppc(pc.material1);
    double lo = numerics::infinity, hi = -numerics::infinity, lo5 = lo, hi5 = hi;
    for (double d : {50.0, 100.0, 200.0, 500.0, 1000.0}) {
        const double g = kernel_G(ppc, pc, 0.0, d, opt);
        lo = std::min(lo, std::pow(d, 4) * g);
        hi = std::max(hi, std::pow(d, 4) * g);
        lo5 = std::min(lo5, std::pow(d, 5) * g);
        hi5 = std::max(hi5, std::pow(d, 5) * g);
    }
    const double spread = (hi - lo) / std::abs(hi), spread5 = (hi5 - lo5) / std::abs(hi5);
    auto slope = [&](const PlatePair& pair) {
        const KernelProvider prov(pair.material1);
        const double d1 = 2.5, d2 = 5.0;
        const double a = gradient_coefficients(prov, pair, d1, opt).delta;
        const double b = gradient_coefficients(prov, pair, d2, opt).delta;
        return std::log(b / a) / std::log(d2 / d1);
    };
    const double s_const = slope(PlatePair{Constant{10.0}, Constant{10.0}, 0.0});
    const double s_drude = slope(gold_pair(0.0));
    const bool a_ok = spread < 1e-5;
    const bool b_ok = std::abs(s_const / -2.0 - 1.0) < 0.02;
    r.pass = a_ok && b_ok;
    r.detail = fmt("(a) d^4 G(0) spread %.2e (tol 1e-5) %s, d^5 G(0) spread %.2e; (b) Constant{10} delta log-slope "
                   "over 2.5-5 nm %.4f (target -2 within 2%%) %s; gold-drude T=0 slope %.4f",
                   spread, a_ok ? "ok" : "fail", spread5, s_const, b_ok ? "ok" : "fail", s_drude);
    return r;
}

inline CheckResult theta1_curve(const CheckContext& ctx) {
    CheckResult r{9, "theta1 curve for gold at 300 K", false, "", 0.0};
    RunConfig c;
    c.temperature = 300.0;
    c.c1 = 0.25;
    c.d_min = 10.0;
    c.d_max = 10.0 * units::thermal_wavelength(300.0);
    c.points = 40;
    c.threads = ctx.threads;
    const auto res = run_sweep(Command::theta1, c);
    const std::string path = ctx.output_dir + "/theta1_gold_300K.csv";
    {
        std::ofstream out(path);
        emit_csv(res.table, out);
    }
    const auto tc = res.table.column("theta1");
    std::vector<double> th;
    for (const auto& row : res.table.rows) th.push_back(row[tc]);
    bool bounded = true, monotone = true, finite = true;
    double jump = 0.0;
    std::size_t at = 1;
    int crossings = 0;
    for (std::size_t i = 0; i < th.size(); ++i) {
        finite = finite && std::isfinite(th[i]);
        bounded = bounded && std::abs(th[i]) <= 1.0;
        if (i == 0) continue;
        if (std::abs(th[i] - th[i - 1]) > jump) {
            jump = std::abs(th[i] - th[i - 1]);
            at = i;
        }
        monotone = monotone && th[i] >= th[i - 1];
        if ((th[i] > 0.0) != (th[i - 1] > 0.0)) ++crossings;
    }
    // Continuity: halving the largest step must split it.
    const PlatePair pair = make_pair(c, nullptr);
    const KernelProvider prov(pair.material1);
    const double dm = std::sqrt(res.table.rows[at - 1][0] * res.table.rows[at][0]);
    const double mid = theta1(pair, prov, dm, c.c1, geometry_options(c)).theta1;
    const double half = std::max(std::abs(mid - th[at - 1]), std::abs(th[at] - mid));
    const bool continuous = finite && half <= 0.8 * jump;
    const double target = 1.0 / (12.0 * units::zeta3);
    const bool large_ok = std::abs(th.back() / target - 1.0) < 0.02;
    const bool small_ok = std::abs(th.front() - (-0.206)) < 0.03;
    const auto lowest = std::min_element(th.begin(), th.end());
    r.pass = continuous && bounded && monotone && crossings == 1 && large_ok && small_ok && res.table.all_converged();
    r.detail = fmt("%zu points, theta1 %.4f (10 nm) to %.4f (10 lambda_T), minimum %.4f at %.0f nm; largest step "
                   "%.4f, %.2f of it after halving, continuous %s; %d zero crossing(s), monotone %s, bounded %s, "
                   "converged %s; CSV %s",
                   th.size(), th.front(), th.back(), *lowest, res.table.rows[lowest - th.begin()][0], jump,
                   half / jump, continuous ? "yes" : "no", crossings, monotone ? "yes" : "no",
                   bounded ? "yes" : "no", res.table.all_converged() ? "yes" : "no", path.c_str());
    return r;
}

inline CheckResult kramers_kronig_oracle(const CheckContext& ctx) {
    CheckResult r{10, "Kramers-Kronig of tabulated Drude data", false, "", 0.0};
    std::ifstream in(ctx.optical_table);
    if (!in) {
        r.detail = "cannot open " + ctx.optical_table;
        return r;
    }
    const auto table = std::make_shared<const OpticalTable>(load_optical_table(in));
    const Tabulated tab{table, gold_drude()};
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double xi = 1e-3 * std::pow(10.0, i / 10.0);
        worst = std::max(worst, std::abs(permittivity(tab, xi) / permittivity(gold_drude(), xi) - 1.0));
    }
    r.pass = worst < 1e-4;
    r.detail = fmt("max relative deviation %.2e over xi in [1e-3, 1e2] eV, %zu table rows (tol 1e-4)", worst,
                   table->size());
    return r;
}

inline CheckResult route_equivalence(const CheckContext& ctx) {
    CheckResult r{11, "free-energy and force-gradient routes", false, "", 0.0};
    const PlatePair pair = pc_pair();
    const KernelProvider prov(pair.material1);
    const double d = 100.0, R = 1e5, h = 5.0;
    GeometryOptions g = options(ctx);
    g.rel_tol = 1e-12;
    const double hc = (d + 2.0 * h) * (1.0 + g.cutoff_factor);
    const DeltaCache cache(prov, pair, d - 2.0 * h, hc, g);
    // Quadrature errors are independent between stencil points; the shared
    // delta cache error is a common relative offset of the gradient term.
    const double cache_rel = cache.probe_error() + cache.max_delta_error();
    double energy_error = 0.0;
    std::map<double, double> gc;
    auto energy = [&](double x) {
        const AxisymmetricProfile prof = AxisymmetricProfile::paraboloid(x, R);
        const auto p = pfa_free_energy(pair, prof, g);
        const auto q = gradient_correction(pair, prov, prof, &cache, g);
        energy_error = std::max(energy_error, p.error + q.error - std::abs(q.value) * cache_rel);
        gc[x] = q.value;
        return p.value + q.value;
    };
    numerics::DiffSpec spec;
    spec.step = h;
    spec.levels = 3;
    const auto e2 = numerics::second_derivative_at(energy, d, spec);
    double amplification = 0.0, step = h;
    for (int i = 0; i < spec.levels; ++i, step *= 0.5) {
        std::vector<double> unit(spec.levels, 0.0);
        unit[i] = 1.0;
        amplification += std::abs(numerics::richardson(unit, spec).value) * 4.0 / (step * step);
    }
    const double hf = 0.25 * h;
    const double gc2 = std::abs(gc.at(d + hf) - 2.0 * gc.at(d) + gc.at(d - hf)) / (hf * hf);
    const auto fg = force_gradient(pair, prov, d, R, 0.0, g);
    const auto t = theta1(pair, prov, d, 0.0, g);
    const double lhs = -e2.value;
    const double correction = fg.value - fg.pfa;
    const double err = e2.error + amplification * energy_error + gc2 * cache_rel + std::abs(fg.pfa * t.error * d / R);
    const double diff = std::abs(lhs - fg.value);
    r.pass = diff <= err && err < 0.1 * std::abs(correction) && e2.converged && cache.converged();
    r.detail = fmt("-E'' = %.10e, force-gradient route %.10e, difference %.2e, combined error %.2e, "
                   "first-order term %.4e",
                   lhs, fg.value, diff, err, correction);
    return r;
}

struct Check {
    int id;
    bool quick;
    std::function<CheckResult(const CheckContext&)> run;
};

inline const std::vector<Check>& all_checks() {
    static const std::vector<Check> list{
        {1, true, ideal_lifshitz},        {2, false, gamma_check},       {3, true, exact_beta},
        {4, true, high_temperature},      {5, false, short_distance},    {6, false, thermal_sensitivity},
        {7, false, quadratic_kernel},     {8, false, scaling},           {9, false, theta1_curve},
        {10, true, kramers_kronig_oracle}, {11, false, route_equivalence}};
    return list;
}

}  // namespace checks

/// Runs the selected checks and returns their results; exceptions are
/// reported as failures.
inline std::vector<CheckResult> run_checks(const CheckContext& ctx, bool quick_only,
                                           const std::function<void(const CheckResult&)>& report = {}) {
    std::vector<CheckResult> out;
    for (const auto& c : checks::all_checks()) {
        if (quick_only && !c.quick) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c.run(ctx);
        } catch (const std::exception& e) {
            r.id = c.id;
            r.pass = false;
            r.name = "check " + std::to_string(c.id);
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (report) report(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format_check(const CheckResult& r) {
    return checks::fmt("%s [%2d] %s: %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                       r.seconds);
}

}  // namespace casimir::cli
