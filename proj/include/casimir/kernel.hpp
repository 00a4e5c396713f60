#pragma once

// Second-order kernel G(k; d) of the perturbative free energy of a deformed
// plate facing a flat one, and the gradient-expansion coefficients
// gamma = G(0), delta = G''(0)/2.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <vector>

#include "casimir/lifshitz.hpp"
#include "casimir/numerics.hpp"
#include "casimir/surface_scattering.hpp"

namespace casimir {

struct KernelOptions {
    double sum_tol = 1e-7;
    /// Gauss order per radial, angular and (T = 0) frequency panel.
    int radial_order = 6;
    int angular_order = 6;
    int angular_panels = 3;
    int frequency_order = 8;
    /// Outer differentiation: step k0 = step/d, halved `levels` times.
    double step = 0.02;
    int levels = 3;
    std::vector<double> exponents{1.0, 2.0};
    /// Relative tolerance of the gamma-check against d2_free_energy_pp/2.
    double gamma_tol = 1e-5;
    bool check_gamma = true;
    int threads = 1;
    LifshitzOptions lifshitz;
};

template <class F>
void parallel_for(long count, int threads, F&& fn) {
    if (threads <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    const int n = static_cast<int>(std::min<long>(threads, count));
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (long i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Flat reflection of the second plate in the provider basis at fixed xi.
class BasisReflector {
  public:
    BasisReflector(const Material& m, double xi) : flat_(m, xi), sign_(xi == 0.0 ? -1.0 : 1.0) {}
    ReflectionPair operator()(double k) const {
        const ReflectionPair r = flat_(k);
        return {sign_ * r.r_e, sign_ * r.r_m};
    }

  private:
    FlatReflector flat_;
    double sign_;
};

/// The bracketed integrand f(k1, k2) at one frequency:
/// -sum_Q q1 rho_Q(k1) [ (B2)_QQ(k1,k1;k2) + 2 sum_Q' q2 rho_Q'(k2) B_QQ'(k1,k2) B_Q'Q(k2,k1) ]
/// with rho = r2 e^{-2qd}/(1 - r1 r2 e^{-2qd}).
inline double kernel_integrand(const KernelProvider& prov, const scattering::Frame& f, const BasisReflector& flat2,
                               Vec2 k1, Vec2 k2, double d) {
    using scattering::cplx;
    const auto a = prov.amplitudes(f, k1, k2);
    const double q1 = KernelProvider::q(f, k1), q2 = KernelProvider::q(f, k2);
    const ReflectionPair s1 = flat2(norm(k1)), s2 = flat2(norm(k2));
    const double e1 = std::exp(-2.0 * q1 * d), e2 = std::exp(-2.0 * q2 * d);
    const std::array<double, 2> r2a{s1.r_e, s1.r_m}, r2b{s2.r_e, s2.r_m};
    std::array<cplx, 2> rho1, rho2;
    for (int Q = 0; Q < 2; ++Q) {
        rho1[Q] = r2a[Q] * e1 / (1.0 - a.r1[Q] * r2a[Q] * e1);
        rho2[Q] = r2b[Q] * e2 / (1.0 - a.r2[Q] * r2b[Q] * e2);
    }
    cplx total = 0.0;
    for (int Q = 0; Q < 2; ++Q) {
        if (rho1[Q] == 0.0) continue;
        const cplx b2 = a.second[Q] / q1;
        cplx bb = 0.0;
        for (int P = 0; P < 2; ++P) bb += q2 * rho2[P] * a.backward[Q][P] * a.forward[P][Q] / (4.0 * q1 * q2);
        total -= q1 * rho1[Q] * (b2 + 2.0 * bb);
    }
    if (!std::isfinite(total.real())) {
        std::ostringstream os;
        os << "kernel integrand not finite at xi = " << f.xi << ", k1 = (" << k1.x << ", " << k1.y << "), k2 = ("
           << k2.x << ", " << k2.y << ")";
        throw NumericsError(os.str());
    }
    return total.real();
}

/// f_n for Matsubara index n (T > 0).
inline double f_n(const KernelProvider& prov, const PlatePair& pair, long n, Vec2 k1, Vec2 k2, double d) {
    if (!(d > 0.0)) throw DomainError("separation must be > 0");
    if (pair.zero_temperature()) throw DomainError("f_n needs T > 0; use kernel_integrand at T = 0");
    const double xi = units::matsubara_frequency(1, pair.temperature) * static_cast<double>(n);
    const auto frame = prov.frame(xi);
    return kernel_integrand(prov, frame, BasisReflector(pair.material2, xi), k1, k2, d);
}

struct GradientCoefficients {
    double gamma = 0.0;
    double delta = 0.0;
    double mu = 0.0;
    double delta_error = 0.0;
    /// d2_free_energy_pp/2 and the relative deviation of gamma from it.
    double gamma_reference = 0.0;
    double gamma_deviation = 0.0;
    long terms_used = 0;
    bool sum_converged = true;
    bool delta_converged = true;
    std::vector<double> steps, sequence;
    bool converged() const { return sum_converged && delta_converged; }
};

/// Evaluates G(k; d) for a fixed pair and separation. The frequency
/// truncation is fixed once by the k = 0 sum so that G is smooth in k.
class KernelEvaluator {
  public:
    KernelEvaluator(const KernelProvider& provider, const PlatePair& pair, double d, KernelOptions opt = {})
        : prov_(provider), pair_(pair), d_(d), opt_(std::move(opt)) {
        if (!(d > 0.0)) throw DomainError("separation must be > 0");
        pair_.validate();
        grid_ = build_grid(pair_.temperature, d_, opt_.sum_tol, opt_.frequency_order);
        const numerics::GaussRule ang = numerics::composite_rule(angular_edges(), opt_.angular_order);
        angle_nodes_ = ang.nodes;
        angle_weights_ = ang.weights;
        setup_frequencies();
    }

    double separation() const { return d_; }
    long terms_used() const { return static_cast<long>(xi_.size()); }
    bool sum_converged() const { return sum_converged_; }
    double gamma() const { return gamma_; }

    /// G(k) with k along the direction `angle`.
    double G(double k, double angle = 0.0) const {
        if (!(k >= 0.0)) throw DomainError("kernel momentum must be >= 0");
        if (k == 0.0) return gamma_;
        return gamma_ + difference(k, angle);
    }

    /// G(k) - G(0) evaluated on a common mesh.
    double difference(double k, double angle = 0.0) const {
        std::vector<double> parts(xi_.size(), 0.0);
        parallel_for(static_cast<long>(xi_.size()), opt_.threads,
                     [&](long i) { parts[i] = weight_[i] * difference_term(i, k, angle); });
        double s = 0.0;
        for (double v : parts) s += v;
        return s;
    }

    /// delta by Richardson extrapolation of (G(h) - G(0))/h^2 at h = step/d, step/2d, ...
    numerics::DiffResult delta_outer(std::vector<double>* steps = nullptr) const {
        numerics::DiffSpec spec;
        spec.step = opt_.step / d_;
        spec.levels = opt_.levels;
        spec.exponents = opt_.exponents;
        spec.validate();
        std::vector<double> base;
        double h = spec.step;
        for (int i = 0; i < spec.levels; ++i, h *= 0.5) {
            base.push_back(difference(h) / (h * h));
            if (steps) steps->push_back(h);
        }
        return numerics::richardson(base, spec);
    }

    /// delta from the pointwise second k-derivative of the integrand at k = 0.
    double delta_inner(double rel_step = 1e-2) const {
        std::vector<double> parts(xi_.size(), 0.0);
        parallel_for(static_cast<long>(xi_.size()), opt_.threads,
                     [&](long i) { parts[i] = weight_[i] * inner_term(i, rel_step); });
        double s = 0.0;
        for (double v : parts) s += v;
        return 0.5 * s;
    }

    /// First-order coefficient mu = kT sum' int d^2k/(2pi)^2 sum_Q 2 q rho_Q B_QQ(k, k).
    double mu() const {
        std::vector<double> parts(xi_.size(), 0.0);
        parallel_for(static_cast<long>(xi_.size()), opt_.threads, [&](long i) {
            const auto f = prov_.frame(xi_[i]);
            const BasisReflector flat2(pair_.material2, xi_[i]);
            const auto nodes = radial_nodes(f.kappa, 0.0);
            double acc = 0.0;
            for (const auto& nd : nodes) {
                const Vec2 k{nd.k, 0.0};
                const auto a = prov_.amplitudes(f, k, k);
                const ReflectionPair r2 = flat2(nd.k);
                const double q = KernelProvider::q(f, k), e = std::exp(-2.0 * q * d_);
                const std::array<double, 2> rr{r2.r_e, r2.r_m};
                double s = 0.0;
                for (int Q = 0; Q < 2; ++Q) {
                    const auto rho = rr[Q] * e / (1.0 - a.r1[Q] * rr[Q] * e);
                    s -= (rho * a.forward[Q][Q]).real();
                }
                acc += nd.w * s;
            }
            parts[i] = weight_[i] * acc;
        });
        double s = 0.0;
        for (double v : parts) s += v;
        return s;
    }

  private:
    struct RadialNode {
        double k, w;  // w carries K dK / (2 pi) in t
    };

    static std::vector<double> angular_edges_w(int panels) {
        std::vector<double> e;
        for (int i = 0; i <= panels; ++i) e.push_back(static_cast<double>(i) / panels);
        return e;
    }
    std::vector<double> angular_edges() const {
        // phi = pi (1 - w^2) gathers nodes towards phi = pi.
        return angular_edges_w(opt_.angular_panels);
    }

    std::vector<RadialNode> radial_nodes(double kappa, double p) const {
        const double a = 2.0 * kappa * d_;
        std::vector<double> edges{0.0};
        for (int j = -6; j <= 6; ++j) edges.push_back(std::ldexp(1.0, j));
        if (p > 0.0) {
            const double tp = 4.0 * d_ * d_ * p * p / (2.0 * d_ * std::hypot(p, kappa) + a);
            for (int j = 1; j <= 4; ++j) {
                edges.push_back(tp * (1.0 - std::ldexp(1.0, -j)));
                edges.push_back(tp * (1.0 + std::ldexp(1.0, -j)));
            }
            edges.push_back(tp);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        const auto rule = numerics::composite_rule(edges, opt_.radial_order);
        std::vector<RadialNode> out;
        out.reserve(rule.nodes.size());
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double t = rule.nodes[i];
            const double k = a == 0.0 ? t / (2.0 * d_) : std::sqrt(t * (t + 2.0 * a)) / (2.0 * d_);
            out.push_back({k, rule.weights[i] * (t + a) / (4.0 * d_ * d_) / (2.0 * units::pi)});
        }
        return out;
    }

    void setup_frequencies() {
        if (grid_.mode == FrequencyGrid::Mode::zero_t) {
            xi_ = grid_.xi;
            weight_ = grid_.weight;
            g0_.assign(xi_.size(), 0.0);
            parallel_for(static_cast<long>(xi_.size()), opt_.threads, [&](long i) { g0_[i] = zero_term(xi_[i]); });
            gamma_ = 0.0;
            for (std::size_t i = 0; i < xi_.size(); ++i) gamma_ += weight_[i] * g0_[i];
            return;
        }
        numerics::SumOptions so;
        so.max_terms = grid_.n_max + 1;
        // Terms are evaluated in batches so that threads can share the work.
        const long batch = std::max(1, opt_.threads) * 4L;
        std::vector<double> cache;
        auto value = [&](long n) {
            if (n >= static_cast<long>(cache.size())) {
                const long start = static_cast<long>(cache.size());
                const long stop = std::min(start + batch, so.max_terms);
                cache.resize(stop, 0.0);
                parallel_for(stop - start, opt_.threads, [&](long j) {
                    const long m = start + j;
                    cache[m] = grid_.matsubara_weight(m) * zero_term(grid_.matsubara(m));
                });
            }
            return cache[n];
        };
        const auto s = numerics::sum_until(value, grid_.term_tol, so);
        sum_converged_ = s.converged || s.terms_used == so.max_terms;
        gamma_ = s.value;
        for (long n = 0; n < s.terms_used; ++n) {
            xi_.push_back(grid_.matsubara(n));
            weight_.push_back(grid_.matsubara_weight(n));
            g0_.push_back(cache[n] / weight_.back());
        }
    }

    // int d^2k/(2pi)^2 f(k, k) at one frequency.
    double zero_term(double xi) const {
        const auto f = prov_.frame(xi);
        const BasisReflector flat2(pair_.material2, xi);
        double acc = 0.0;
        for (const auto& nd : radial_nodes(f.kappa, 0.0)) {
            const Vec2 k{nd.k, 0.0};
            acc += nd.w * kernel_integrand(prov_, f, flat2, k, k, d_);
        }
        return acc;
    }

    double difference_term(std::size_t i, double p, double angle) const {
        const double xi = xi_[i];
        const auto f = prov_.frame(xi);
        const BasisReflector flat2(pair_.material2, xi);
        const Vec2 pv = rotate(Vec2{p, 0.0}, angle);
        double acc = 0.0;
        for (const auto& nd : radial_nodes(f.kappa, p)) {
            const double base = kernel_integrand(prov_, f, flat2, rotate(Vec2{nd.k, 0.0}, angle),
                                                 rotate(Vec2{nd.k, 0.0}, angle), d_);
            double ang = 0.0;
            for (std::size_t j = 0; j < angle_nodes_.size(); ++j) {
                const double w = angle_nodes_[j];
                const double phi = units::pi * (1.0 - w * w);
                const double jac = 2.0 * units::pi * w;
                const Vec2 k1 = rotate(Vec2{nd.k * std::cos(phi), nd.k * std::sin(phi)}, angle);
                ang += angle_weights_[j] * jac * (kernel_integrand(prov_, f, flat2, k1, k1 + pv, d_) - base);
            }
            // Mirror symmetry phi -> -phi; the radial weight already has 1/(2 pi).
            acc += nd.w * 2.0 * ang / (2.0 * units::pi);
        }
        return acc;
    }

    double inner_term(std::size_t i, double rel_step) const {
        const double xi = xi_[i];
        const auto f = prov_.frame(xi);
        const BasisReflector flat2(pair_.material2, xi);
        static const numerics::GaussRule rule = numerics::gauss_legendre(16);
        double acc = 0.0;
        for (const auto& nd : radial_nodes(f.kappa, 0.0)) {
            double ang = 0.0;
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double phi = 0.5 * units::pi * (1.0 + rule.nodes[j]);
                const Vec2 k1{nd.k * std::cos(phi), nd.k * std::sin(phi)};
                const double f0 = kernel_integrand(prov_, f, flat2, k1, k1, d_);
                auto second = [&](double h) {
                    const double fp = kernel_integrand(prov_, f, flat2, k1, k1 + Vec2{h, 0.0}, d_);
                    const double fm = kernel_integrand(prov_, f, flat2, k1, k1 - Vec2{h, 0.0}, d_);
                    return (fp - 2.0 * f0 + fm) / (h * h);
                };
                const double h = rel_step * nd.k;
                const double d1 = second(h), d2 = second(0.5 * h);
                ang += rule.weights[j] * 0.5 * units::pi * (4.0 * d2 - d1) / 3.0;
            }
            acc += nd.w * 2.0 * ang / (2.0 * units::pi);
        }
        return acc;
    }

    const KernelProvider& prov_;
    PlatePair pair_;
    double d_;
    KernelOptions opt_;
    FrequencyGrid grid_;
    std::vector<double> angle_nodes_, angle_weights_;
    std::vector<double> xi_, weight_, g0_;
    double gamma_ = 0.0;
    bool sum_converged_ = true;
};

/// G(k; d) for a single momentum magnitude.
inline double kernel_G(const KernelProvider& prov, const PlatePair& pair, double k, double d,
                       const KernelOptions& opt = {}) {
    return KernelEvaluator(prov, pair, d, opt).G(k);
}

/// gamma and delta with diagnostics. Throws NumericsError when gamma
/// disagrees with d2_free_energy_pp/2 beyond opt.gamma_tol.
inline GradientCoefficients gradient_coefficients(const KernelProvider& prov, const PlatePair& pair, double d,
                                                  const KernelOptions& opt = {}) {
    const KernelEvaluator ev(prov, pair, d, opt);
    GradientCoefficients out;
    out.gamma = ev.gamma();
    out.terms_used = ev.terms_used();
    out.sum_converged = ev.sum_converged();
    if (opt.check_gamma) {
        const auto ref = d2_free_energy_pp(pair, d, opt.lifshitz);
        out.gamma_reference = 0.5 * ref.value;
        out.gamma_deviation = out.gamma_reference == 0.0
                                  ? std::abs(out.gamma)
                                  : std::abs(out.gamma / out.gamma_reference - 1.0);
        const double scale = std::abs(out.gamma_reference);
        const bool vanishing = scale == 0.0 && std::abs(out.gamma) < 1e-300;
        if (!vanishing && out.gamma_deviation > opt.gamma_tol) {
            std::ostringstream os;
            os << "gamma-check failed at d = " << d << " nm: G(0) = " << out.gamma
               << ", d2F/2 = " << out.gamma_reference << " (relative deviation " << out.gamma_deviation << ")";
            throw NumericsError(os.str());
        }
    }
    const auto r = ev.delta_outer(&out.steps);
    out.delta = r.value;
    out.delta_error = r.error;
    out.delta_converged = r.converged;
    out.sequence = r.sequence;
    return out;
}

}  // namespace casimir
