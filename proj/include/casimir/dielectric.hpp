#pragma once

// Permittivities at imaginary frequency, Fresnel reflection coefficients and
// the Kramers-Kronig transform of tabulated optical data.
//
// Frequencies are photon energies in eV, wave numbers in 1/nm.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "casimir/error.hpp"
#include "casimir/numerics.hpp"
#include "casimir/units.hpp"

namespace casimir {

struct PerfectConductor {
    bool operator==(const PerfectConductor&) const = default;
};

/// eps(i xi) = 1 + plasma^2 / (xi (xi + damping)).
struct Drude {
    double plasma = 0.0;
    double damping = 0.0;
    bool operator==(const Drude&) const = default;
};

/// eps(i xi) = 1 + plasma^2 / xi^2.
struct Plasma {
    double plasma = 0.0;
    bool operator==(const Plasma&) const = default;
};

struct Constant {
    double eps = 1.0;
    bool operator==(const Constant&) const = default;
};

/// Im eps(omega) sampled at strictly increasing photon energies.
class OpticalTable {
  public:
    OpticalTable(std::vector<double> energy, std::vector<double> im_eps)
        : energy_(std::move(energy)), im_eps_(std::move(im_eps)) {
        if (energy_.size() != im_eps_.size()) throw ValidationError("optical table columns differ in length");
        if (energy_.size() < 2) throw ValidationError("optical table needs at least 2 rows");
        for (std::size_t i = 0; i < energy_.size(); ++i) {
            if (!(energy_[i] > 0.0)) throw ValidationError("optical table energies must be > 0");
            if (!(im_eps_[i] >= 0.0)) throw ValidationError("optical table Im eps must be >= 0");
            if (i > 0 && !(energy_[i] > energy_[i - 1]))
                throw ValidationError("optical table energies must be strictly increasing");
        }
    }

    const std::vector<double>& energy() const { return energy_; }
    const std::vector<double>& im_eps() const { return im_eps_; }
    std::size_t size() const { return energy_.size(); }
    double min_energy() const { return energy_.front(); }
    double max_energy() const { return energy_.back(); }

    /// Log-log interpolation inside the table (linear where a sample is zero).
    double interpolate(double omega) const {
        if (omega <= energy_.front()) return im_eps_.front();
        if (omega >= energy_.back()) return im_eps_.back();
        const auto it = std::upper_bound(energy_.begin(), energy_.end(), omega);
        const std::size_t i = static_cast<std::size_t>(it - energy_.begin()) - 1;
        return segment_value(i, omega);
    }

    double segment_value(std::size_t i, double omega) const {
        const double w0 = energy_[i], w1 = energy_[i + 1];
        const double y0 = im_eps_[i], y1 = im_eps_[i + 1];
        if (y0 > 0.0 && y1 > 0.0) {
            const double t = std::log(omega / w0) / std::log(w1 / w0);
            return y0 * std::pow(y1 / y0, t);
        }
        return y0 + (y1 - y0) * (omega - w0) / (w1 - w0);
    }

    bool operator==(const OpticalTable&) const = default;

  private:
    std::vector<double> energy_, im_eps_;
};

/// Tabulated optical data; `extrapolation` supplies Im eps below the table.
struct Tabulated {
    std::shared_ptr<const OpticalTable> table;
    Drude extrapolation;
    bool operator==(const Tabulated& o) const {
        return extrapolation == o.extrapolation &&
               (table == o.table || (table && o.table && *table == *o.table));
    }
};

using PermittivityModel = std::variant<PerfectConductor, Drude, Plasma, Constant, Tabulated>;

/// Gold in the Drude model: plasma frequency 9 eV, relaxation 35 meV.
inline Drude gold_drude() { return Drude{9.0, 0.035}; }

inline void validate(const PermittivityModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Drude>) {
                if (!(m.plasma > 0.0) || !(m.damping >= 0.0))
                    throw ValidationError("Drude model needs plasma > 0 and damping >= 0");
            } else if constexpr (std::is_same_v<T, Plasma>) {
                if (!(m.plasma > 0.0)) throw ValidationError("plasma model needs plasma > 0");
            } else if constexpr (std::is_same_v<T, Constant>) {
                if (!(m.eps >= 1.0)) throw ValidationError("constant permittivity must be >= 1");
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                if (!m.table) throw ValidationError("tabulated model without a table");
                if (!(m.extrapolation.plasma > 0.0) || !(m.extrapolation.damping >= 0.0))
                    throw ValidationError("invalid Drude extrapolation parameters");
            }
        },
        model);
}

inline bool is_perfect_conductor(const PermittivityModel& m) {
    return std::holds_alternative<PerfectConductor>(m);
}

inline std::string describe(const PermittivityModel& model) {
    std::ostringstream os;
    os.precision(10);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PerfectConductor>) os << "perfect";
            else if constexpr (std::is_same_v<T, Drude>) os << "drude:" << m.plasma << "," << m.damping;
            else if constexpr (std::is_same_v<T, Plasma>) os << "plasma:" << m.plasma;
            else if constexpr (std::is_same_v<T, Constant>) os << "constant:" << m.eps;
            else os << "tabulated(" << m.table->size() << " rows):" << m.extrapolation.plasma << ","
                    << m.extrapolation.damping;
        },
        model);
    return os.str();
}

namespace detail {

// (2/pi) int_0^a  plasma^2 damping / ((w^2 + damping^2)(w^2 + xi^2)) dw, i.e. the
// Kramers-Kronig contribution of the Drude Im eps = plasma^2 damping /(w (w^2 + damping^2)).
inline double drude_kk_below(const Drude& m, double a, double xi) {
    const double wp2 = m.plasma * m.plasma, g = m.damping;
    if (g == 0.0) return wp2 / (xi * xi);
    const double diff = xi * xi - g * g;
    if (std::abs(diff) > 1e-6 * xi * xi) {
        const double val = (std::atan(a / g) / g - std::atan(a / xi) / xi) / diff;
        return (2.0 / units::pi) * wp2 * g * val;
    }
    auto f = [&](double w) { return wp2 * g / ((w * w + g * g) * (w * w + xi * xi)); };
    numerics::QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    return (2.0 / units::pi) * numerics::integrate(f, 0.0, a, spec).value;
}

// int_a^inf dw / (w^2 (w^2 + xi^2)).
inline double inverse_fourth_tail(double a, double xi) {
    const double x = xi / a;
    if (x < 1e-3) return (1.0 / 3.0 - x * x / 5.0 + x * x * x * x / 7.0) / (a * a * a);
    return (1.0 / a - std::atan(x) / xi) / (xi * xi);
}

}  // namespace detail

/// eps(i xi) from Im eps by the Kramers-Kronig relation
/// eps(i xi) = 1 + (2/pi) int_0^inf w Im eps(w) / (w^2 + xi^2) dw.
/// Below the table the Drude form is used, above it Im eps ~ w^-3.
inline double kramers_kronig(const OpticalTable& table, const Drude& extrapolation, double xi) {
    if (!(xi > 0.0)) throw DomainError("Kramers-Kronig transform needs xi > 0");
    double sum = detail::drude_kk_below(extrapolation, table.min_energy(), xi);

    static const numerics::GaussRule rule = numerics::gauss_legendre(8);
    const auto& w = table.energy();
    double seg = 0.0;
    auto piece = [&](std::size_t i, double lo, double hi) {
        // Integrate in x = ln w, dw = w dx.
        const double xl = std::log(lo), xh = std::log(hi);
        const double c = 0.5 * (xl + xh), h = 0.5 * (xh - xl);
        double acc = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double om = std::exp(c + h * rule.nodes[j]);
            acc += rule.weights[j] * om * om * table.segment_value(i, om) / (om * om + xi * xi);
        }
        return acc * h;
    };
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (xi > w[i] && xi < w[i + 1]) {
            seg += piece(i, w[i], xi) + piece(i, xi, w[i + 1]);
        } else {
            seg += piece(i, w[i], w[i + 1]);
        }
    }
    sum += (2.0 / units::pi) * seg;

    const double wmax = table.max_energy(), ymax = table.im_eps().back();
    sum += (2.0 / units::pi) * ymax * wmax * wmax * wmax * detail::inverse_fourth_tail(wmax, xi);
    return 1.0 + sum;
}

/// eps(i xi) for xi > 0. Perfect conductors have no finite permittivity and
/// are handled at the level of reflection coefficients.
inline double permittivity(const PermittivityModel& model, double xi) {
    if (!(xi > 0.0)) throw DomainError("permittivity needs xi > 0; use reflection_zero_freq at xi = 0");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PerfectConductor>) {
                throw UnsupportedError(
                    "perfect conductor has no finite permittivity; use reflection coefficients");
            } else if constexpr (std::is_same_v<T, Drude>) {
                return 1.0 + m.plasma * m.plasma / (xi * (xi + m.damping));
            } else if constexpr (std::is_same_v<T, Plasma>) {
                return 1.0 + m.plasma * m.plasma / (xi * xi);
            } else if constexpr (std::is_same_v<T, Constant>) {
                return m.eps;
            } else {
                return kramers_kronig(*m.table, m.extrapolation, xi);
            }
        },
        model);
}

/// Fresnel coefficients at imaginary frequency; r_e is the E (TM) and r_m the
/// M (TE) polarization.
struct ReflectionPair {
    double r_e = 0.0;
    double r_m = 0.0;
};

inline ReflectionPair fresnel(double eps, double kappa, double k) {
    const double q = std::sqrt(k * k + kappa * kappa);
    const double s = std::sqrt(k * k + eps * kappa * kappa);
    return {(eps * q - s) / (eps * q + s), (q - s) / (q + s)};
}

inline ReflectionPair reflection(const PermittivityModel& model, double xi, double k) {
    if (!(xi > 0.0)) throw DomainError("reflection needs xi > 0; use reflection_zero_freq");
    if (!(k >= 0.0)) throw DomainError("reflection needs k >= 0");
    if (is_perfect_conductor(model)) return {1.0, -1.0};
    return fresnel(permittivity(model, xi), units::wave_number(xi), k);
}

/// xi -> 0 limits of the Fresnel coefficients.
inline ReflectionPair reflection_zero_freq(const PermittivityModel& model, double k) {
    if (!(k > 0.0)) throw DomainError("reflection_zero_freq needs k > 0");
    return std::visit(
        [&](const auto& m) -> ReflectionPair {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PerfectConductor>) {
                return {1.0, -1.0};
            } else if constexpr (std::is_same_v<T, Plasma>) {
                const double kp = m.plasma / units::hbar_c;
                const double s = std::sqrt(k * k + kp * kp);
                return {1.0, (k - s) / (k + s)};
            } else if constexpr (std::is_same_v<T, Constant>) {
                return {(m.eps - 1.0) / (m.eps + 1.0), 0.0};
            } else {
                return {1.0, 0.0};
            }
        },
        model);
}

/// Parses two whitespace-separated columns (photon energy in eV, Im eps);
/// '#' starts a comment line. Rows are sorted by energy.
inline OpticalTable load_optical_table(std::istream& in) {
    std::vector<std::pair<double, double>> rows;
    std::vector<int> line_of;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra)) throw ParseError("expected two columns", lineno);
        auto number = [&](const std::string& tok) {
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
                throw ParseError("malformed number '" + tok + "'", lineno);
            return v;
        };
        const double e = number(a), y = number(b);
        if (!(e > 0.0)) throw ValidationError("line " + std::to_string(lineno) + ": photon energy must be > 0");
        if (!(y >= 0.0)) throw ValidationError("line " + std::to_string(lineno) + ": Im eps must be >= 0");
        rows.emplace_back(e, y);
        line_of.push_back(lineno);
    }
    if (rows.size() < 2) throw ValidationError("optical table needs at least 2 rows");
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return rows[i].first < rows[j].first; });
    std::vector<double> energy, im;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && rows[order[i]].first == rows[order[i - 1]].first)
            throw ValidationError("line " + std::to_string(line_of[order[i]]) + ": duplicate photon energy");
        energy.push_back(rows[order[i]].first);
        im.push_back(rows[order[i]].second);
    }
    return OpticalTable(std::move(energy), std::move(im));
}

/// Natural cubic spline of ln(eps - 1) against ln(xi) on a log-spaced grid.
class EpsilonCache {
  public:
    EpsilonCache() = default;

    template <class F>
    EpsilonCache(F&& eps, double xi_min, double xi_max, int points = 256)
        : lx0_(std::log(xi_min)), lx1_(std::log(xi_max)) {
        if (!(xi_min > 0.0 && xi_max > xi_min) || points < 4)
            throw DomainError("invalid permittivity cache range");
        const int n = points;
        h_ = (lx1_ - lx0_) / (n - 1);
        y_.resize(n);
        for (int i = 0; i < n; ++i) {
            const double e = eps(std::exp(lx0_ + i * h_));
            if (!(e > 1.0)) throw NumericsError("permittivity cache requires eps > 1");
            y_[i] = std::log(e - 1.0);
        }
        // Natural spline second derivatives (uniform spacing).
        m_.assign(n, 0.0);
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (int i = 1; i < n - 1; ++i) {
            const double rhs = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (h_ * h_);
            const double denom = 4.0 - c[i - 1];
            c[i] = 1.0 / denom;
            d[i] = (rhs - d[i - 1]) / denom;
        }
        for (int i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
    }

    bool contains(double xi) const {
        if (y_.empty()) return false;
        const double lx = std::log(xi);
        return lx >= lx0_ && lx <= lx1_;
    }

    double operator()(double xi) const {
        const double lx = std::log(xi);
        int i = static_cast<int>((lx - lx0_) / h_);
        i = std::clamp(i, 0, static_cast<int>(y_.size()) - 2);
        const double t = (lx - lx0_ - i * h_) / h_, u = 1.0 - t;
        const double val = u * y_[i] + t * y_[i + 1] +
                           h_ * h_ / 6.0 * ((u * u * u - u) * m_[i] + (t * t * t - t) * m_[i + 1]);
        return 1.0 + std::exp(val);
    }

  private:
    double lx0_ = 0.0, lx1_ = 0.0, h_ = 1.0;
    std::vector<double> y_, m_;
};

/// A permittivity model prepared for repeated evaluation. Tabulated data is
/// transformed once onto an EpsilonCache; all other variants are closed form.
class Material {
  public:
    Material() : Material(PermittivityModel{PerfectConductor{}}) {}

    template <class M>
        requires std::is_constructible_v<PermittivityModel, M>
    Material(M model, double xi_min = 1e-3, double xi_max = 1e4) : model_(std::move(model)) {
        validate(model_);
        if (const auto* t = std::get_if<Tabulated>(&model_)) {
            const Tabulated tab = *t;
            cache_ = std::make_shared<EpsilonCache>(
                [&tab](double xi) { return kramers_kronig(*tab.table, tab.extrapolation, xi); }, xi_min,
                xi_max);
        }
    }

    const PermittivityModel& model() const { return model_; }
    bool perfect() const { return is_perfect_conductor(model_); }
    bool tabulated() const { return cache_ != nullptr; }

    double epsilon(double xi) const {
        if (cache_ && cache_->contains(xi)) return (*cache_)(xi);
        return permittivity(model_, xi);
    }

    ReflectionPair reflection(double xi, double k) const {
        if (perfect()) return {1.0, -1.0};
        return fresnel(epsilon(xi), units::wave_number(xi), k);
    }

    ReflectionPair reflection_zero_freq(double k) const { return casimir::reflection_zero_freq(model_, k); }

  private:
    PermittivityModel model_;
    std::shared_ptr<const EpsilonCache> cache_;
};

}  // namespace casimir
