#pragma once

// Proximity-force and gradient-expansion functionals for curved profiles,
// and the leading curvature correction theta1 to the PFA force gradient.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "casimir/kernel.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/numerics.hpp"

namespace casimir {

/// H(rho) = d + rho^2/(2R) + c1 rho^4/(2R^3) + sum_j c_j rho^{2j+2}/(2R^{2j+1}),
/// with `higher` holding c_2, c_3, ... (not used by theta1).
struct AxisymmetricProfile {
    double d = 0.0;
    double R = 0.0;
    double c1 = 0.0;
    std::vector<double> higher;

    static AxisymmetricProfile sphere(double d, double R) { return {d, R, 0.25, {}}; }
    static AxisymmetricProfile paraboloid(double d, double R) { return {d, R, 0.0, {}}; }

    void validate() const {
        if (!(d > 0.0)) throw ValidationError("profile separation must be > 0");
        if (!(R > 0.0)) throw ValidationError("profile radius must be > 0");
        if (!std::isfinite(c1)) throw ValidationError("profile coefficient c1 must be finite");
    }

    /// Height as a function of s = rho^2.
    double height(double s) const {
        double h = d + s / (2.0 * R) + c1 * s * s / (2.0 * R * R * R);
        double sp = s * s, rp = R * R * R;
        for (double c : higher) {
            sp *= s;
            rp *= R * R;
            h += c * sp / (2.0 * rp);
        }
        return h;
    }
    double dheight_ds(double s) const {
        double g = 1.0 / (2.0 * R) + c1 * s / (R * R * R);
        double sp = s, rp = R * R * R;
        int j = 2;
        for (double c : higher) {
            sp *= s;
            rp *= R * R;
            g += c * (j + 1) * sp / (2.0 * rp);
            ++j;
        }
        return g;
    }
    /// |grad H|^2 = 4 s (dH/ds)^2.
    double grad2(double s) const {
        const double g = dheight_ds(s);
        return 4.0 * s * g * g;
    }
    /// Smallest s with height(s) = H (H >= d), for monotone profiles.
    double s_at(double H) const {
        if (H <= d) return 0.0;
        double lo = 0.0, hi = 2.0 * R * (H - d);
        if (c1 < 0.0 || !higher.empty()) {
            while (height(hi) < H) hi *= 2.0;
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (height(mid) < H ? lo : hi) = mid;
            if (hi - lo <= 1e-15 * hi) break;
        }
        return 0.5 * (lo + hi);
    }
    double cutoff_height(double factor = 20.0) const { return d + factor * std::min(d, R); }
};

/// A general height profile over the bounding box [x0, x1] x [y0, y1]; points
/// where `inside` returns false are masked out.
struct HeightField {
    std::function<double(double, double)> height;
    std::function<Vec2(double, double)> gradient;
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    std::function<bool(double, double)> inside;
    int panels = 16;
    int order = 8;

    void validate() const {
        if (!height || !gradient) throw ValidationError("height field needs height and gradient evaluators");
        if (!(x1 > x0 && y1 > y0)) throw ValidationError("height field region must have positive area");
        if (panels < 1 || order < 1) throw ValidationError("invalid height field mesh");
    }
};

struct GeometryOptions {
    double rel_tol = 1e-10;
    double cutoff_factor = 20.0;
    int cache_nodes = 32;
    int cache_probes = 3;
    int max_subdivisions = 400;
    KernelOptions kernel;
    LifshitzOptions lifshitz;
};

/// A profile energy (eV) with its truncation tail and error estimate.
struct EnergyResult {
    double value = 0.0;
    double tail = 0.0;
    double error = 0.0;
    bool converged = true;
    /// Largest relative deviation of the delta interpolation at its probes.
    double interpolation_error = 0.0;
};

/// delta(H) tabulated on a log grid, interpolated as delta H^3 against ln H by a
/// monotone (Fritsch-Carlson) cubic.
class DeltaCache {
  public:
    DeltaCache() = default;

    DeltaCache(const KernelProvider& prov, const PlatePair& pair, double h_min, double h_max,
               const GeometryOptions& opt = {}) {
        if (!(h_min > 0.0 && h_max > h_min)) throw DomainError("delta cache needs 0 < h_min < h_max");
        const int n = std::max(2, opt.cache_nodes);
        x_.resize(n);
        y_.resize(n);
        std::vector<GradientCoefficients> coeffs(n);
        const double lx0 = std::log(h_min), lx1 = std::log(h_max);
        for (int i = 0; i < n; ++i) x_[i] = lx0 + (lx1 - lx0) * i / (n - 1);
        KernelOptions kopt = opt.kernel;
        const int threads = kopt.threads;
        kopt.threads = 1;
        parallel_for(n, threads, [&](long i) {
            coeffs[i] = gradient_coefficients(prov, pair, std::exp(x_[i]), kopt);
        });
        for (int i = 0; i < n; ++i) {
            const double H = std::exp(x_[i]);
            y_[i] = coeffs[i].delta * H * H * H;
            converged_ = converged_ && coeffs[i].converged();
            max_delta_error_ = std::max(max_delta_error_, relative(coeffs[i].delta_error, coeffs[i].delta));
        }
        slopes();
        // Probes between nodes spread over the range.
        const int probes = std::max(0, opt.cache_probes);
        std::vector<double> px(probes), pv(probes);
        for (int j = 0; j < probes; ++j) {
            const int cell = std::min(n - 2, (j + 1) * (n - 1) / (probes + 1));
            px[j] = 0.5 * (x_[cell] + x_[cell + 1]);
        }
        parallel_for(probes, threads, [&](long j) {
            pv[j] = gradient_coefficients(prov, pair, std::exp(px[j]), kopt).delta;
        });
        for (int j = 0; j < probes; ++j)
            probe_error_ = std::max(probe_error_, relative((*this)(std::exp(px[j])) - pv[j], pv[j]));
    }

    double h_min() const { return std::exp(x_.front()); }
    double h_max() const { return std::exp(x_.back()); }
    bool converged() const { return converged_; }
    double probe_error() const { return probe_error_; }
    double max_delta_error() const { return max_delta_error_; }
    bool empty() const { return x_.empty(); }

    double operator()(double H) const {
        if (x_.empty()) throw DomainError("delta cache is empty");
        const double x = std::log(H);
        const double tol = 1e-9 * std::max(1.0, std::abs(x_.back()));
        if (x < x_.front() - tol || x > x_.back() + tol)
            throw DomainError("height " + std::to_string(H) + " nm outside the delta cache range");
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = static_cast<std::size_t>(std::max<long>(0, it - x_.begin() - 1));
        i = std::min(i, x_.size() - 2);
        const double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double y = (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
                         (t3 - t2) * h * m_[i + 1];
        return y / (H * H * H);
    }

  private:
    static double relative(double err, double ref) {
        return ref == 0.0 ? std::abs(err) : std::abs(err / ref);
    }

    void slopes() {
        const std::size_t n = x_.size();
        std::vector<double> sec(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) sec[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_.assign(n, 0.0);
        m_[0] = sec[0];
        m_[n - 1] = sec[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) m_[i] = sec[i - 1] * sec[i] <= 0.0 ? 0.0 : 0.5 * (sec[i - 1] + sec[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (sec[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            const double a = m_[i] / sec[i], b = m_[i + 1] / sec[i];
            const double r = a * a + b * b;
            if (r > 9.0) {
                const double tau = 3.0 / std::sqrt(r);
                m_[i] = tau * a * sec[i];
                m_[i + 1] = tau * b * sec[i];
            }
        }
    }

    std::vector<double> x_, y_, m_;
    bool converged_ = true;
    double probe_error_ = 0.0;
    double max_delta_error_ = 0.0;
};

namespace detail {

// Adaptive radial integral of pi * g(s) ds over [0, s_c], plus the remainder
// beyond the cutoff with the plate quantity continued as a power law
// q(H_c) (H_c/H)^m, evaluated by `tail(s, m)`. The tail error is the change
// when the exponent m_inner taken further inside is used instead.
template <class G, class Tail>
EnergyResult radial_integral(const AxisymmetricProfile& prof, G&& g, Tail&& tail, double m, double m_inner,
                             const GeometryOptions& opt) {
    prof.validate();
    const double hc = prof.cutoff_height(opt.cutoff_factor);
    const double sc = prof.s_at(hc);
    numerics::QuadratureSpec spec;
    spec.rel_tol = opt.rel_tol;
    spec.abs_tol = 1e-300;
    spec.max_subdivisions = opt.max_subdivisions;
    // Panels with growing width resolve the scale s ~ R d near the apex.
    std::vector<double> edges{0.0};
    for (double e = std::min(sc, 2.0 * prof.R * prof.d * 1e-2); e < sc; e *= 4.0) edges.push_back(e);
    edges.push_back(sc);
    EnergyResult out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const auto r = numerics::integrate([&](double s) { return units::pi * g(s); }, edges[i], edges[i + 1], spec);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
    }
    if (!std::isfinite(m)) {
        out.converged = false;
        return out;
    }
    spec.decay_scale = std::max(sc, 1e-300);
    const auto r = numerics::integrate([&](double s) { return units::pi * tail(s, m); }, sc, numerics::infinity, spec);
    if (!std::isfinite(r.value)) {
        out.converged = false;
        return out;
    }
    double drift = 0.0;
    if (std::isfinite(m_inner) && m_inner != m)
        drift = std::abs(numerics::integrate([&](double s) { return units::pi * tail(s, m_inner); }, sc,
                                             numerics::infinity, spec)
                             .value -
                         r.value);
    out.tail = r.value;
    out.value += r.value;
    out.error += r.error + drift;
    out.converged = out.converged && r.converged;
    return out;
}

}  // namespace detail

/// PFA energy: integral of F_pp(H(rho)) over the plane.
inline EnergyResult pfa_free_energy(const PlatePair& pair, const AxisymmetricProfile& prof,
                                    const GeometryOptions& opt = {}) {
    bool inner_ok = true;
    auto g = [&](double s) {
        const auto r = free_energy_pp(pair, prof.height(s), opt.lifshitz);
        inner_ok = inner_ok && r.converged;
        return r.value;
    };
    const double hc = prof.cutoff_height(opt.cutoff_factor);
    auto exponent = [&](double h) {
        const double e = free_energy_pp(pair, h, opt.lifshitz).value;
        return e == 0.0 ? 3.0 : h * force_pp(pair, h, opt.lifshitz).value / e;
    };
    const double ec = free_energy_pp(pair, hc, opt.lifshitz).value;
    auto tail = [&](double s, double p) { return ec * std::pow(hc / prof.height(s), p); };
    auto out = detail::radial_integral(prof, g, tail, exponent(hc), exponent(0.5 * (prof.d + hc)), opt);
    out.converged = out.converged && inner_ok;
    return out;
}

inline EnergyResult pfa_free_energy(const PlatePair& pair, const HeightField& field, const GeometryOptions& opt = {});

/// Gradient correction: integral of delta(H) |grad H|^2. Builds a DeltaCache
/// over the profile's height range unless one is supplied.
inline EnergyResult gradient_correction(const PlatePair& pair, const KernelProvider& prov,
                                        const AxisymmetricProfile& prof, const DeltaCache* cache = nullptr,
                                        const GeometryOptions& opt = {}) {
    prof.validate();
    std::optional<DeltaCache> own;
    if (!cache) {
        own.emplace(prov, pair, prof.d, prof.cutoff_height(opt.cutoff_factor), opt);
        cache = &*own;
    }
    auto g = [&](double s) { return (*cache)(prof.height(s)) * prof.grad2(s); };
    const double hc = prof.cutoff_height(opt.cutoff_factor);
    auto exponent = [&](double h) {
        const double eps = 1e-3;
        const double a = (*cache)(h), b = (*cache)(h * (1.0 - eps));
        return (a == 0.0 || a * b <= 0.0) ? 3.0 : std::log(b / a) / std::log(1.0 / (1.0 - eps));
    };
    const double dc = (*cache)(hc);
    auto tail = [&](double s, double p) { return dc * std::pow(hc / prof.height(s), p) * prof.grad2(s); };
    auto out = detail::radial_integral(prof, g, tail, exponent(hc), exponent(0.5 * (prof.d + hc)), opt);
    out.converged = out.converged && cache->converged();
    out.interpolation_error = cache->probe_error();
    out.error += std::abs(out.value) * (cache->probe_error() + cache->max_delta_error());
    return out;
}

namespace detail {

struct FieldNode {
    double x, y, w;
};

inline std::vector<FieldNode> field_nodes(const HeightField& f) {
    f.validate();
    auto edges = [&](double a, double b) {
        std::vector<double> e;
        for (int i = 0; i <= f.panels; ++i) e.push_back(a + (b - a) * i / f.panels);
        return e;
    };
    const auto rx = numerics::composite_rule(edges(f.x0, f.x1), f.order);
    const auto ry = numerics::composite_rule(edges(f.y0, f.y1), f.order);
    std::vector<FieldNode> out;
    for (std::size_t i = 0; i < rx.nodes.size(); ++i)
        for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
            const double x = rx.nodes[i], y = ry.nodes[j];
            if (f.inside && !f.inside(x, y)) continue;
            out.push_back({x, y, rx.weights[i] * ry.weights[j]});
        }
    return out;
}

}  // namespace detail

inline EnergyResult pfa_free_energy(const PlatePair& pair, const HeightField& field, const GeometryOptions& opt) {
    EnergyResult out;
    for (const auto& nd : detail::field_nodes(field)) {
        const double H = field.height(nd.x, nd.y);
        if (!(H > 0.0)) throw ValidationError("height field touches the plate");
        const auto r = free_energy_pp(pair, H, opt.lifshitz);
        out.value += nd.w * r.value;
        out.error += nd.w * r.error;
        out.converged = out.converged && r.converged;
    }
    return out;
}

inline EnergyResult gradient_correction(const PlatePair& pair, const KernelProvider& prov, const HeightField& field,
                                        const GeometryOptions& opt = {}) {
    const auto nodes = detail::field_nodes(field);
    double hmin = numerics::infinity, hmax = 0.0;
    bool sloped = false;
    for (const auto& nd : nodes) {
        const double H = field.height(nd.x, nd.y);
        if (!(H > 0.0)) throw ValidationError("height field touches the plate");
        const Vec2 g = field.gradient(nd.x, nd.y);
        if (g.x != 0.0 || g.y != 0.0) {
            sloped = true;
            hmin = std::min(hmin, H);
            hmax = std::max(hmax, H);
        }
    }
    EnergyResult out;
    if (!sloped) return out;
    if (hmax <= hmin) hmax = hmin * 1.01;
    const DeltaCache cache(prov, pair, hmin, hmax, opt);
    for (const auto& nd : nodes) {
        const Vec2 g = field.gradient(nd.x, nd.y);
        if (g.x == 0.0 && g.y == 0.0) continue;
        out.value += nd.w * cache(field.height(nd.x, nd.y)) * (g.x * g.x + g.y * g.y);
    }
    out.converged = cache.converged();
    out.interpolation_error = cache.probe_error();
    out.error = std::abs(out.value) * (cache.probe_error() + cache.max_delta_error());
    return out;
}

struct Theta1Result {
    double d = 0.0;
    double c1 = 0.0;
    double beta = 0.0;
    double theta1 = 0.0;
    double free_energy = 0.0;
    double force = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double error = 0.0;
    bool converged = true;
    GradientCoefficients coefficients;

    /// theta1 recomputed from its parts.
    double assemble() const { return free_energy / (d * force) * (2.0 * beta - 4.0 * c1); }
};

inline Theta1Result theta1(const PlatePair& pair, const KernelProvider& prov, double d, double c1,
                           const GeometryOptions& opt = {}) {
    if (!(d > 0.0)) throw DomainError("separation must be > 0");
    Theta1Result r;
    r.d = d;
    r.c1 = c1;
    const auto e = free_energy_pp(pair, d, opt.lifshitz);
    const auto f = force_pp(pair, d, opt.lifshitz);
    r.free_energy = e.value;
    r.force = f.value;
    r.coefficients = gradient_coefficients(prov, pair, d, opt.kernel);
    r.delta = r.coefficients.delta;
    r.gamma = r.coefficients.gamma;
    if (r.free_energy == 0.0 || r.force == 0.0) throw DomainError("theta1 is undefined for non-interacting plates");
    r.beta = r.delta / r.free_energy;
    r.theta1 = r.assemble();
    r.error = std::abs(2.0 * r.coefficients.delta_error / (d * r.force)) +
              std::abs(r.theta1) * (e.error / std::abs(e.value) + f.error / std::abs(f.value));
    r.converged = e.converged && f.converged && r.coefficients.converged();
    return r;
}

struct ForceGradientResult {
    double value = 0.0;  // dF/dd (eV/nm^2)
    double pfa = 0.0;    // -2 pi R F_pp(d)
    double theta1 = 0.0;
    bool converged = true;
    std::vector<std::string> warnings;
};

/// dF/dd = -2 pi R F_pp(d) (1 + theta1 d/R).
inline ForceGradientResult force_gradient(const PlatePair& pair, const KernelProvider& prov, double d, double R,
                                          double c1, const GeometryOptions& opt = {}) {
    if (!(R > 0.0)) throw DomainError("radius must be > 0");
    const auto t = theta1(pair, prov, d, c1, opt);
    ForceGradientResult out;
    out.theta1 = t.theta1;
    out.pfa = -2.0 * units::pi * R * t.force;
    out.value = out.pfa * (1.0 + t.theta1 * d / R);
    out.converged = t.converged;
    if (d / R > 0.1)
        out.warnings.push_back("d/R = " + std::to_string(d / R) + " exceeds 0.1; the expansion in d/R may be inaccurate");
    return out;
}

struct Theta1Limit {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    std::vector<Theta1Result> points;
};

/// theta1 at d -> 0 by Richardson extrapolation over a geometric grid of
/// separations d0, d0/2, d0/4, ... with error exponents 1, 2, ...
inline Theta1Limit theta1_small_distance(const PlatePair& pair, const KernelProvider& prov, double c1,
                                         double d0 = 20.0, int levels = 3, const GeometryOptions& opt = {}) {
    Theta1Limit out;
    std::vector<double> seq;
    double d = d0;
    for (int i = 0; i < levels; ++i, d *= 0.5) {
        out.points.push_back(theta1(pair, prov, d, c1, opt));
        seq.push_back(out.points.back().theta1);
        out.converged = out.converged && out.points.back().converged;
    }
    numerics::DiffSpec spec;
    spec.levels = levels;
    spec.exponents = {1.0, 2.0, 3.0};
    const auto r = numerics::richardson(seq, spec);
    out.value = r.value;
    out.error = r.error;
    for (const auto& p : out.points) out.error = std::max(out.error, p.error);
    out.converged = out.converged && r.converged;
    return out;
}

}  // namespace casimir
