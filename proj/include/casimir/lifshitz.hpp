#pragma once

// Parallel-plate Lifshitz free energy per unit area and its first two
// distance derivatives, at finite temperature (Matsubara sum) or T = 0.

#include <cmath>
#include <string>
#include <vector>

#include "casimir/dielectric.hpp"
#include "casimir/error.hpp"
#include "casimir/numerics.hpp"
#include "casimir/units.hpp"

namespace casimir {

/// Two half-spaces at temperature `temperature` (kelvin, 0 for T = 0).
/// material1 is the curved body when the pair is used by the kernel module.
struct PlatePair {
    Material material1;
    Material material2;
    double temperature = 0.0;

    void validate() const {
        if (!(temperature >= 0.0) || !std::isfinite(temperature))
            throw ValidationError("temperature must be finite and >= 0");
    }
    bool zero_temperature() const { return temperature == 0.0; }
};

struct LifshitzOptions {
    double rel_tol = 1e-8;  // inner quadrature
    double sum_tol = 1e-7;  // Matsubara sum
    int max_subdivisions = 200;
};

/// Matsubara frequencies or the T = 0 rule for a given separation.
struct FrequencyGrid {
    enum class Mode { finite_t, zero_t };

    Mode mode = Mode::zero_t;
    double temperature = 0.0;
    double separation = 0.0;
    /// FiniteT: hard cap on n and the number of terms after which the
    /// e^{-2 kappa_n d} envelope has converged.
    long n_max = 0;
    long envelope_terms = 0;
    /// Effective per-term tolerance of the sum (scaled by the envelope ratio).
    double term_tol = 0.0;
    /// ZeroT: xi = scale * t with t = 2 kappa d, and a fixed composite rule in t
    /// whose weights already carry d xi/(2 pi).
    double scale = 0.0;
    std::vector<double> xi, weight;

    /// FiniteT only.
    double matsubara(long n) const { return units::matsubara_frequency(1, temperature) * static_cast<double>(n); }
    /// k_B T w_n, with the n = 0 term halved.
    double matsubara_weight(long n) const {
        return units::k_boltzmann * temperature * (n == 0 ? 0.5 : 1.0);
    }
};

/// Breakpoints of the fixed T = 0 rule in t = 2 kappa d.
inline std::vector<double> zero_t_edges() {
    std::vector<double> e{0.0};
    for (int j = -8; j <= 6; ++j) e.push_back(std::ldexp(1.0, j));
    for (double x : {96.0, 128.0}) e.push_back(x);
    return e;
}

inline FrequencyGrid build_grid(double kelvin, double d, double tol = 1e-7, int zero_t_order = 12) {
    if (!(d > 0.0)) throw DomainError("separation must be > 0");
    if (!(kelvin >= 0.0)) throw DomainError("temperature must be >= 0");
    if (!(tol > 0.0 && tol < 1.0)) throw DomainError("grid tolerance must lie in (0, 1)");
    if (zero_t_order < 1) throw DomainError("frequency rule order must be >= 1");
    FrequencyGrid g;
    g.temperature = kelvin;
    g.separation = d;
    if (kelvin == 0.0) {
        g.mode = FrequencyGrid::Mode::zero_t;
        g.scale = units::hbar_c / (2.0 * d);
        const numerics::GaussRule rule = numerics::composite_rule(zero_t_edges(), zero_t_order);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            g.xi.push_back(g.scale * rule.nodes[i]);
            g.weight.push_back(g.scale * rule.weights[i] / (2.0 * units::pi));
        }
        return g;
    }
    g.mode = FrequencyGrid::Mode::finite_t;
    const double lambda = units::thermal_wavelength(kelvin);
    g.n_max = static_cast<long>(std::ceil(40.0 * lambda / (4.0 * units::pi * d)));
    if (g.n_max < 1) g.n_max = 1;
    const double ratio = std::exp(-4.0 * units::pi * d / lambda);
    g.term_tol = tol * (1.0 - ratio);
    numerics::SumOptions opt;
    opt.max_terms = g.n_max + 1;
    const auto env = numerics::sum_until(
        [&](long n) { return (n == 0 ? 0.5 : 1.0) * std::pow(ratio, static_cast<double>(n)); }, g.term_tol,
        opt);
    g.envelope_terms = env.terms_used;
    for (long n = 0; n < g.envelope_terms; ++n) {
        g.xi.push_back(g.matsubara(n));
        g.weight.push_back(g.matsubara_weight(n));
    }
    return g;
}

/// A value with its accumulated error estimate and convergence flags.
struct PlateResult {
    double value = 0.0;
    double error = 0.0;
    long terms_used = 0;
    bool converged = true;
};

/// Reflection of a flat half-space at fixed xi.
class FlatReflector {
  public:
    FlatReflector(const Material& m, double xi) : xi_(xi), kappa_(units::wave_number(xi)) {
        perfect_ = m.perfect();
        if (!perfect_ && xi > 0.0) eps_ = m.epsilon(xi);
        material_ = &m;
    }
    ReflectionPair operator()(double k) const {
        if (perfect_) return {1.0, -1.0};
        if (xi_ == 0.0) return material_->reflection_zero_freq(k);
        return fresnel(eps_, kappa_, k);
    }

  private:
    const Material* material_ = nullptr;
    double xi_, kappa_, eps_ = 1.0;
    bool perfect_ = false;
};

namespace detail {

enum class PlateQuantity { free_energy, force, second_derivative };

// Per-frequency spectral integral (1/4d^2) int u du/(2 pi) sum_Q g(x_Q e^{-u}),
// written in t = u - 2 kappa d >= 0.
inline numerics::QuadResult plate_xi_integral(const PlatePair& pair, double xi, double d, PlateQuantity what,
                                              const LifshitzOptions& opt) {
    const FlatReflector r1(pair.material1, xi), r2(pair.material2, xi);
    const double a = 2.0 * units::wave_number(xi) * d;
    auto f = [&](double t) {
        const double u = t + a;
        double k = std::sqrt(t * (t + 2.0 * a)) / (2.0 * d);
        if (xi == 0.0) k = u / (2.0 * d);
        if (!(k > 0.0)) k = 1e-300;
        const ReflectionPair p1 = r1(k), p2 = r2(k);
        const double e = std::exp(-u);
        double acc = 0.0;
        for (const double x : {p1.r_e * p2.r_e, p1.r_m * p2.r_m}) {
            const double y = x * e;
            if (y == 0.0) continue;
            switch (what) {
                case PlateQuantity::free_energy: acc += std::log1p(-y); break;
                case PlateQuantity::force: acc -= (u / d) * y / (1.0 - y); break;
                case PlateQuantity::second_derivative: acc -= (u * u / (d * d)) * y / ((1.0 - y) * (1.0 - y)); break;
            }
        }
        return u * acc / (2.0 * units::pi * 4.0 * d * d);
    };
    numerics::QuadratureSpec spec;
    spec.rel_tol = opt.rel_tol;
    spec.max_subdivisions = opt.max_subdivisions;
    spec.abs_tol = 1e-300;
    return numerics::integrate(f, 0.0, numerics::infinity, spec);
}

inline PlateResult plate_quantity(const PlatePair& pair, double d, PlateQuantity what, const LifshitzOptions& opt) {
    if (!(d > 0.0)) throw DomainError("separation must be > 0");
    pair.validate();
    const FrequencyGrid grid = build_grid(pair.temperature, d, opt.sum_tol);
    PlateResult res;
    if (grid.mode == FrequencyGrid::Mode::zero_t) {
        numerics::QuadratureSpec spec;
        spec.rel_tol = opt.rel_tol * 10.0;
        spec.max_subdivisions = opt.max_subdivisions;
        spec.abs_tol = 1e-300;
        bool inner_ok = true;
        double inner_err = 0.0;
        auto g = [&](double t) {
            const auto r = plate_xi_integral(pair, grid.scale * t, d, what, opt);
            inner_ok = inner_ok && r.converged;
            inner_err = std::max(inner_err, std::abs(r.error / (r.value == 0.0 ? 1.0 : r.value)));
            return r.value;
        };
        const auto r = numerics::integrate(g, 0.0, numerics::infinity, spec);
        const double pre = grid.scale / (2.0 * units::pi);
        res.value = pre * r.value;
        res.error = pre * r.error + std::abs(res.value) * inner_err;
        res.terms_used = r.evaluations;
        res.converged = r.converged && inner_ok;
        return res;
    }
    double err = 0.0;
    bool ok = true;
    numerics::SumOptions so;
    so.max_terms = grid.n_max + 1;
    const auto s = numerics::sum_until(
        [&](long n) {
            const auto r = plate_xi_integral(pair, grid.matsubara(n), d, what, opt);
            ok = ok && r.converged;
            err += grid.matsubara_weight(n) * r.error;
            return grid.matsubara_weight(n) * r.value;
        },
        grid.term_tol, so);
    res.value = s.value;
    res.error = err + std::abs(s.value) * opt.sum_tol;
    res.terms_used = s.terms_used;
    // The envelope bounds everything past the hard cap.
    res.converged = ok && (s.converged || s.terms_used == so.max_terms);
    return res;
}

}  // namespace detail

/// Free energy per unit area (eV/nm^2).
inline PlateResult free_energy_pp(const PlatePair& pair, double d, const LifshitzOptions& opt = {}) {
    return detail::plate_quantity(pair, d, detail::PlateQuantity::free_energy, opt);
}

/// Force per unit area F = -dF/dd (eV/nm^3), differentiated under the integral.
inline PlateResult force_pp(const PlatePair& pair, double d, const LifshitzOptions& opt = {}) {
    return detail::plate_quantity(pair, d, detail::PlateQuantity::force, opt);
}

/// Second distance derivative of the free energy per unit area (eV/nm^4).
inline PlateResult d2_free_energy_pp(const PlatePair& pair, double d, const LifshitzOptions& opt = {}) {
    return detail::plate_quantity(pair, d, detail::PlateQuantity::second_derivative, opt);
}

}  // namespace casimir
