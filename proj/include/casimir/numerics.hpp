#pragma once

// Shared numerical primitives: adaptive Gauss-Kronrod quadrature on finite and
// semi-infinite intervals, fixed Gauss-Legendre rules, Richardson-extrapolated
// second differences and convergent-series summation.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "casimir/error.hpp"

namespace casimir::numerics {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class RuleKind {
    /// Adaptive 7/15-point Gauss-Kronrod bisection on finite panels.
    gauss_kronrod,
    /// Same rule after the map x = a + L t/(1-t) of [a, inf) onto [0, 1).
    semi_infinite,
};

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_subdivisions = 200;
    RuleKind rule = RuleKind::gauss_kronrod;
    /// Decay length L of the semi-infinite map.
    double decay_scale = 1.0;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1.0))
            throw DomainError("quadrature relative tolerance must lie in (0, 1)");
        if (!(abs_tol >= 0.0)) throw DomainError("quadrature absolute tolerance must be >= 0");
        if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
        if (!(decay_scale > 0.0)) throw DomainError("decay_scale must be > 0");
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> gk15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> k15_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (plus the center).
inline constexpr std::array<double, 4> g7_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

[[noreturn]] inline void throw_nan(double x) {
    std::ostringstream os;
    os.precision(17);
    os << "integrand returned a non-finite value at x = " << x;
    throw NumericsError(os.str());
}

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    auto eval = [&](double x) {
        const double y = f(x);
        if (!std::isfinite(y)) throw_nan(x);
        return y;
    };
    const double fc = eval(c);
    double kron = fc * k15_weights[7];
    double gauss = fc * g7_weights[3];
    double mean_abs = std::abs(fc) * k15_weights[7];
    std::array<double, 7> fsum{};
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk15_nodes[j];
        const double f1 = eval(c - dx), f2 = eval(c + dx);
        fsum[j] = f1 + f2;
        kron += k15_weights[j] * fsum[j];
        mean_abs += k15_weights[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += g7_weights[j / 2] * fsum[j];
    }
    // QUADPACK error scaling.
    const double mean = kron * 0.5;
    double asc = std::abs(fc - mean) * k15_weights[7];
    for (int j = 0; j < 7; ++j)
        asc += k15_weights[j] * (std::abs(fsum[j] * 0.5 - mean) * 2.0);
    asc *= std::abs(h);
    double err = std::abs((kron - gauss) * h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double round = 50.0 * std::numeric_limits<double>::epsilon() * mean_abs * std::abs(h);
    if (round > err) err = round;
    return {a, b, kron * h, err};
}

template <class F>
QuadResult adaptive(F& f, double a, double b, const QuadratureSpec& spec) {
    std::priority_queue<Panel> heap;
    Panel first = gk15(f, a, b);
    double total = first.value, error = first.error;
    heap.push(first);
    int evals = 15, subdivisions = 1;
    auto done = [&] { return error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (!done() && subdivisions < spec.max_subdivisions) {
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {  // interval exhausted
            heap.push(worst);
            break;
        }
        Panel left = gk15(f, worst.a, mid), right = gk15(f, mid, worst.b);
        evals += 30;
        ++subdivisions;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to remove drift from incremental updates.
    double sum = 0.0, err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    QuadResult r;
    r.value = sum;
    r.error = err;
    r.evaluations = evals;
    r.converged = err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
    return r;
}

}  // namespace detail

/// Integrates f over [a, b]; b may be +infinity. A semi-infinite range is
/// mapped by x = a + L t/(1-t) with L = spec.decay_scale.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (std::isnan(a) || std::isnan(b) || std::isinf(a)) throw DomainError("invalid integration bounds");
    if (a == b) return {};
    if (std::isinf(b) || spec.rule == RuleKind::semi_infinite) {
        if (!std::isinf(b)) throw DomainError("semi-infinite rule requires an infinite upper bound");
        const double scale = spec.decay_scale;
        auto mapped = [&](double t) {
            const double s = 1.0 - t;
            if (s <= 0.0) return 0.0;
            return f(a + scale * t / s) * scale / (s * s);
        };
        return detail::adaptive(mapped, 0.0, 1.0, spec);
    }
    if (b < a) {
        QuadResult r = integrate(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    auto plain = [&](double x) { return f(x); };
    return detail::adaptive(plain, a, b, spec);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes, weights;
};

inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Composite Gauss-Legendre rule with `order` nodes on each panel between
/// consecutive entries of `edges`. Returns abscissae and weights.
inline GaussRule composite_rule(const std::vector<double>& edges, int order) {
    const GaussRule base = gauss_legendre(order);
    GaussRule out;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        if (!(b > a)) continue;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int i = 0; i < order; ++i) {
            out.nodes.push_back(c + h * base.nodes[i]);
            out.weights.push_back(h * base.weights[i]);
        }
    }
    return out;
}

struct DiffSpec {
    double step = 1e-2;
    /// Number of step sizes h, h/2, h/4, ... (>= 1).
    int levels = 3;
    /// Exponents p_j of the error terms h^{p_j} removed by successive
    /// Richardson levels. Empty means the smooth-function series 2, 4, 6, ...
    std::vector<double> exponents;
    /// Largest accepted ratio of successive increments of the raw sequence.
    double max_increment_ratio = 0.8;

    void validate() const {
        if (!(step > 0.0)) throw DomainError("difference step must be > 0");
        if (levels < 1) throw DomainError("Richardson levels must be >= 1");
    }
    double exponent(int j) const {
        return j < static_cast<int>(exponents.size()) ? exponents[j] : 2.0 * (j + 1);
    }
};

struct DiffResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    /// Un-extrapolated second differences at h, h/2, ...
    std::vector<double> sequence;
};

/// Richardson extrapolation of a sequence computed at steps h, h/2, h/4, ...
inline DiffResult richardson(const std::vector<double>& base, const DiffSpec& spec) {
    const int n = static_cast<int>(base.size());
    std::vector<std::vector<double>> table(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) table[i][0] = base[i];
    for (int j = 1; j < n; ++j) {
        const double factor = std::pow(2.0, spec.exponent(j - 1)) - 1.0;
        for (int i = j; i < n; ++i)
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / factor;
    }
    DiffResult r;
    r.sequence = base;
    r.value = table[n - 1][n - 1];
    if (n >= 2) {
        r.error = std::max(std::abs(table[n - 1][n - 1] - table[n - 1][n - 2]),
                           std::abs(table[n - 1][n - 1] - table[n - 2][n - 2]));
    } else {
        r.error = infinity;
    }
    // The raw sequence must approach its limit with shrinking increments; a
    // ratio near 1 signals a logarithmically divergent limit.
    for (int i = 2; i < n; ++i) {
        const double prev = std::abs(base[i - 1] - base[i - 2]);
        const double cur = std::abs(base[i] - base[i - 1]);
        const double noise = 1e-13 * std::max(std::abs(base[i]), std::abs(base[i - 1]));
        if (cur > spec.max_increment_ratio * prev + noise) r.converged = false;
    }
    return r;
}

/// Second derivative by symmetric differences at x0 with Richardson
/// extrapolation over halved steps.
template <class F>
DiffResult second_derivative_at(F&& f, double x0, const DiffSpec& spec = {}) {
    spec.validate();
    const double f0 = f(x0);
    if (!std::isfinite(f0)) throw NumericsError("non-finite function value at the expansion point");
    std::vector<double> base;
    double h = spec.step;
    for (int i = 0; i < spec.levels; ++i, h *= 0.5) {
        const double fp = f(x0 + h), fm = f(x0 - h);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericsError("non-finite function value in second difference");
        base.push_back((fp - 2.0 * f0 + fm) / (h * h));
    }
    return richardson(base, spec);
}

struct SumOptions {
    /// Number of consecutive small terms required to stop.
    int consecutive = 3;
    /// Hard cap on the number of terms.
    long max_terms = 1000000;
};

struct SumResult {
    double value = 0.0;
    long terms_used = 0;
    bool converged = true;
};

/// Sums term(0) + term(1) + ... until `consecutive` successive terms each
/// satisfy |t| <= rel_tol |partial sum|.
template <class Term>
SumResult sum_until(Term&& term, double rel_tol, const SumOptions& opt = {}) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("sum tolerance must lie in (0, 1)");
    if (opt.consecutive < 1 || opt.max_terms < 1) throw DomainError("invalid summation options");
    SumResult r;
    int small = 0;
    for (long n = 0; n < opt.max_terms; ++n) {
        const double t = term(n);
        if (!std::isfinite(t)) throw NumericsError("non-finite series term at n = " + std::to_string(n));
        r.value += t;
        r.terms_used = n + 1;
        small = std::abs(t) <= rel_tol * std::abs(r.value) ? small + 1 : 0;
        if (small >= opt.consecutive) return r;
    }
    r.converged = false;
    return r;
}

}  // namespace casimir::numerics
