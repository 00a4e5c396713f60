#pragma once

// First- and second-order reflection amplitudes of a gently deformed
// half-space z > eta(x), obtained by expanding the boundary conditions in eta
// (Rayleigh small-perturbation method).
//
// Polarization slot 0 is E (TM), slot 1 is M (TE). At xi = 0 the two slots
// become the decoupled electrostatic and magnetostatic problems.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "casimir/dielectric.hpp"
#include "casimir/error.hpp"
#include "casimir/units.hpp"

namespace casimir {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 rotate(Vec2 a, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}

namespace scattering {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
using Mat2 = std::array<std::array<cplx, 2>, 2>;

enum class Boundary {
    transparent,
    dielectric,        // xi > 0, finite eps
    perfect,           // xi > 0, tangential E vanishes
    dirichlet,         // static potential fixed on the surface
    neumann,           // static normal derivative vanishes
    potential_jump,    // static dielectric: phi and eps d_n phi continuous
    london,            // static magnetic field screened by London currents
};

/// Boundary problem at one frequency.
struct Frame {
    double xi = 0.0;
    double kappa = 0.0;
    double eps = 1.0;
    double screening = 0.0;  // London wave number (1/nm)
    Boundary dynamic = Boundary::transparent;
    Boundary electric = Boundary::transparent;
    Boundary magnetic = Boundary::transparent;
    bool is_static() const { return xi == 0.0; }
};

struct Wave {
    Vec2 k;
    int sigma = 1;
    double p = 0.0;  // decay constant: the wave varies as e^{sigma p z}
    int slot = 0;
    std::array<cplx, 4> A{}, Cx{}, Cy{};
};

// Small dense LU with partial pivoting.
struct Lu {
    int n = 0;
    std::array<std::array<cplx, 4>, 4> m{};
    std::array<int, 4> piv{};

    void factor() {
        for (int c = 0; c < n; ++c) {
            int best = c;
            for (int r = c + 1; r < n; ++r)
                if (std::abs(m[r][c]) > std::abs(m[best][c])) best = r;
            piv[c] = best;
            std::swap(m[c], m[best]);
            if (std::abs(m[c][c]) == 0.0) throw NumericsError("singular boundary-condition matrix");
            for (int r = c + 1; r < n; ++r) {
                m[r][c] /= m[c][c];
                for (int j = c + 1; j < n; ++j) m[r][j] -= m[r][c] * m[c][j];
            }
        }
    }
    void solve(std::array<cplx, 4>& b) const {
        for (int c = 0; c < n; ++c) std::swap(b[c], b[piv[c]]);
        for (int c = 0; c < n; ++c)
            for (int r = c + 1; r < n; ++r) b[r] -= m[r][c] * b[c];
        for (int c = n - 1; c >= 0; --c) {
            cplx s = b[c];
            for (int j = c + 1; j < n; ++j) s -= m[c][j] * b[j];
            b[c] = s / m[c][c];
        }
    }
};

/// One decoupled boundary problem at a given in-plane wave vector: incident
/// waves, unknown waves (reflected ones first, one per slot) and its matrix.
struct Block {
    std::vector<int> slots;
    std::vector<Wave> incident, unknown;
    Lu lu;
};

inline void add_vacuum_em(std::vector<Wave>& out, const Frame& f, Vec2 k, int sigma) {
    const double K = norm(k), q = std::sqrt(K * K + f.kappa * f.kappa);
    const Vec2 kh{k.x / K, k.y / K}, ep{-kh.y, kh.x};
    Wave tm;
    tm.k = k, tm.sigma = sigma, tm.p = q, tm.slot = 0;
    {
        const cplx ex = -sigma * q * kh.x, ey = -sigma * q * kh.y, ez = I * K;
        const cplx hx = f.kappa * ep.x, hy = f.kappa * ep.y;
        tm.A = {ex, ey, hx, hy};
        tm.Cx = {ez, 0.0, 0.0, 0.0};
        tm.Cy = {0.0, ez, 0.0, 0.0};
    }
    Wave te;
    te.k = k, te.sigma = sigma, te.p = q, te.slot = 1;
    {
        const cplx ex = f.kappa * ep.x, ey = f.kappa * ep.y;
        const cplx hx = sigma * q * kh.x, hy = sigma * q * kh.y, hz = -I * K;
        te.A = {ex, ey, hx, hy};
        te.Cx = {0.0, 0.0, hz, 0.0};
        te.Cy = {0.0, 0.0, 0.0, hz};
    }
    out.push_back(tm);
    out.push_back(te);
}

inline void add_material_em(std::vector<Wave>& out, const Frame& f, Vec2 k) {
    const double K = norm(k), e = f.eps, s = std::sqrt(K * K + e * f.kappa * f.kappa);
    const Vec2 kh{k.x / K, k.y / K}, ep{-kh.y, kh.x};
    const int sigma = -1;
    Wave tm;
    tm.k = k, tm.sigma = sigma, tm.p = s, tm.slot = 0;
    {
        const cplx ex = -sigma * s * kh.x / e, ey = -sigma * s * kh.y / e, ez = I * K / e;
        const cplx hx = f.kappa * ep.x, hy = f.kappa * ep.y;
        tm.A = {-ex, -ey, -hx, -hy};
        tm.Cx = {-ez, 0.0, 0.0, 0.0};
        tm.Cy = {0.0, -ez, 0.0, 0.0};
    }
    Wave te;
    te.k = k, te.sigma = sigma, te.p = s, te.slot = 1;
    {
        const cplx ex = f.kappa * ep.x, ey = f.kappa * ep.y;
        const cplx hx = sigma * s * kh.x, hy = sigma * s * kh.y, hz = -I * K;
        te.A = {-ex, -ey, -hx, -hy};
        te.Cx = {0.0, 0.0, -hz, 0.0};
        te.Cy = {0.0, 0.0, 0.0, -hz};
    }
    out.push_back(tm);
    out.push_back(te);
}

// Static potential psi = e^{i k.x + sigma K z}; rows depend on the boundary.
inline Wave static_vacuum(Boundary b, Vec2 k, int sigma, int slot) {
    const double K = norm(k);
    Wave w;
    w.k = k, w.sigma = sigma, w.p = K, w.slot = slot;
    switch (b) {
        case Boundary::dirichlet: w.A[0] = 1.0; break;
        case Boundary::neumann:
            w.A[0] = sigma * K;
            w.Cx[0] = -I * k.x;
            w.Cy[0] = -I * k.y;
            break;
        case Boundary::potential_jump:
            w.A = {1.0, sigma * K, 0.0, 0.0};
            w.Cx[1] = -I * k.x;
            w.Cy[1] = -I * k.y;
            break;
        case Boundary::london:  // H = -grad psi, all components continuous
            w.A = {-I * k.x, -I * k.y, -double(sigma) * K, 0.0};
            break;
        default: throw NumericsError("invalid static boundary");
    }
    return w;
}

inline void add_static_material(std::vector<Wave>& out, const Frame& f, Boundary b, Vec2 k, int slot) {
    const double K = norm(k);
    if (b == Boundary::potential_jump) {
        Wave w;
        w.k = k, w.sigma = -1, w.p = K, w.slot = slot;
        w.A = {-1.0, f.eps * K, 0.0, 0.0};
        w.Cx[1] = f.eps * I * k.x;
        w.Cy[1] = f.eps * I * k.y;
        out.push_back(w);
    } else if (b == Boundary::london) {
        const double s = std::sqrt(K * K + f.screening * f.screening);
        const Vec2 kh{k.x / K, k.y / K}, ep{-kh.y, kh.x};
        Wave a;
        a.k = k, a.sigma = -1, a.p = s, a.slot = slot;
        a.A = {s * kh.x, s * kh.y, I * K, 0.0};
        Wave t = a;
        t.A = {-s * ep.x, -s * ep.y, 0.0, 0.0};
        out.push_back(a);
        out.push_back(t);
    }
}

inline std::vector<Block> build_blocks(const Frame& f, Vec2 k) {
    std::vector<Block> blocks;
    auto finish = [&](Block& b, int rows) {
        b.lu.n = rows;
        if (static_cast<int>(b.unknown.size()) != rows) throw NumericsError("boundary system is not square");
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < rows; ++j) b.lu.m[i][j] = b.unknown[j].A[i];
        b.lu.factor();
        blocks.push_back(std::move(b));
    };
    if (!f.is_static()) {
        if (f.dynamic == Boundary::transparent) return blocks;
        Block b;
        b.slots = {0, 1};
        add_vacuum_em(b.incident, f, k, -1);
        add_vacuum_em(b.unknown, f, k, +1);
        if (f.dynamic == Boundary::dielectric) {
            add_material_em(b.unknown, f, k);
            finish(b, 4);
        } else {
            finish(b, 2);
        }
        return blocks;
    }
    const std::array<Boundary, 2> kinds{f.electric, f.magnetic};
    for (int slot = 0; slot < 2; ++slot) {
        const Boundary kind = kinds[slot];
        if (kind == Boundary::transparent) continue;
        Block b;
        b.slots = {slot};
        b.incident.push_back(static_vacuum(kind, k, -1, slot));
        b.unknown.push_back(static_vacuum(kind, k, +1, slot));
        add_static_material(b.unknown, f, kind, k, slot);
        const int rows = kind == Boundary::potential_jump ? 2 : kind == Boundary::london ? 3 : 1;
        finish(b, rows);
    }
    return blocks;
}

/// Amplitudes for one pair of wave vectors (k1, k2) with p = k2 - k1:
/// flat reflection r at both, first-order transfer in both directions and the
/// diagonal second-order amplitude at k1 through the intermediate k2.
struct PairAmplitudes {
    std::array<cplx, 2> r1{}, r2{};
    Mat2 forward{};   // k2 <- k1, [out][in]
    Mat2 backward{};  // k1 <- k2
    std::array<cplx, 2> second{};
};

using Vec4 = std::array<cplx, 4>;

inline void source1(Vec4& s, const Wave& w, cplx a, Vec2 p, int n) {
    for (int r = 0; r < n; ++r) s[r] += a * (double(w.sigma) * w.p * w.A[r] + I * (p.x * w.Cx[r] + p.y * w.Cy[r]));
}
inline void source2(Vec4& s, const Wave& w, cplx a, Vec2 p, int n) {
    for (int r = 0; r < n; ++r)
        s[r] += a * (0.5 * w.p * w.p * w.A[r] + double(w.sigma) * w.p * I * (-p.x * w.Cx[r] - p.y * w.Cy[r]));
}

inline PairAmplitudes pair_amplitudes(const Frame& f, Vec2 k1, Vec2 k2) {
    PairAmplitudes out;
    const std::vector<Block> b1 = build_blocks(f, k1), b2 = build_blocks(f, k2);
    const Vec2 p = k2 - k1;
    for (std::size_t bi = 0; bi < b1.size(); ++bi) {
        const Block &s1 = b1[bi], &s2 = b2[bi];
        const int n = s1.lu.n, ns = static_cast<int>(s1.slots.size());
        for (int j = 0; j < ns; ++j) {
            const int qj = s1.slots[j];
            // Zeroth order at k1 and k2.
            Vec4 x0{}, y0{};
            for (int r = 0; r < n; ++r) x0[r] = -s1.incident[j].A[r], y0[r] = -s2.incident[j].A[r];
            s1.lu.solve(x0);
            s2.lu.solve(y0);
            out.r1[qj] = x0[j];
            out.r2[qj] = y0[j];
            // First order k1 -> k2.
            Vec4 x1{};
            source1(x1, s1.incident[j], 1.0, p, n);
            for (int u = 0; u < n; ++u) source1(x1, s1.unknown[u], x0[u], p, n);
            for (auto& v : x1) v = -v;
            s2.lu.solve(x1);
            for (int i = 0; i < ns; ++i) out.forward[s1.slots[i]][qj] = x1[i];
            // First order k2 -> k1.
            Vec4 y1{};
            source1(y1, s2.incident[j], 1.0, -p, n);
            for (int u = 0; u < n; ++u) source1(y1, s2.unknown[u], y0[u], -p, n);
            for (auto& v : y1) v = -v;
            s1.lu.solve(y1);
            for (int i = 0; i < ns; ++i) out.backward[s1.slots[i]][qj] = y1[i];
            // Second order at k1 through k2.
            Vec4 x2{};
            source2(x2, s1.incident[j], 1.0, p, n);
            for (int u = 0; u < n; ++u) source2(x2, s1.unknown[u], x0[u], p, n);
            for (int u = 0; u < n; ++u) source1(x2, s2.unknown[u], x1[u], -p, n);
            for (auto& v : x2) v = -v;
            s1.lu.solve(x2);
            out.second[qj] = x2[j];
        }
    }
    return out;
}

}  // namespace scattering

/// Scattering amplitudes of the deformed body (material1 of a PlatePair).
class KernelProvider {
  public:
    explicit KernelProvider(Material curved) : material_(std::move(curved)) {}

    const Material& material() const { return material_; }

    scattering::Frame frame(double xi) const { return make_frame(material_, xi); }

    static scattering::Frame make_frame(const Material& m, double xi) {
        using scattering::Boundary;
        if (!(xi >= 0.0)) throw DomainError("frequency must be >= 0");
        scattering::Frame f;
        f.xi = xi;
        f.kappa = units::wave_number(xi);
        const auto& model = m.model();
        if (xi > 0.0) {
            if (m.perfect()) {
                f.dynamic = Boundary::perfect;
            } else {
                f.eps = m.epsilon(xi);
                f.dynamic = f.eps == 1.0 ? Boundary::transparent : Boundary::dielectric;
            }
            return f;
        }
        if (std::holds_alternative<PerfectConductor>(model)) {
            f.electric = Boundary::dirichlet;
            f.magnetic = Boundary::neumann;
        } else if (const auto* c = std::get_if<Constant>(&model)) {
            f.eps = c->eps;
            f.electric = c->eps == 1.0 ? Boundary::transparent : Boundary::potential_jump;
        } else if (const auto* pl = std::get_if<Plasma>(&model)) {
            f.electric = Boundary::dirichlet;
            f.magnetic = Boundary::london;
            f.screening = pl->plasma / units::hbar_c;
        } else {
            f.electric = Boundary::dirichlet;
        }
        return f;
    }

    /// Flat-surface reflection in the basis used by this provider: the
    /// Fresnel coefficients for xi > 0 and their negated limits at xi = 0.
    static ReflectionPair basis_reflection(const Material& m, double xi, double k) {
        if (xi > 0.0) return m.reflection(xi, k);
        const ReflectionPair r = m.reflection_zero_freq(k);
        return {-r.r_e, -r.r_m};
    }

    scattering::PairAmplitudes amplitudes(const scattering::Frame& f, Vec2 k1, Vec2 k2) const {
        check_vector(k1);
        check_vector(k2);
        return scattering::pair_amplitudes(f, k1, k2);
    }

    /// First-order matrix B_{QQ'}(k, k') for scattering k' -> k, normalized so
    /// that the deformed T-operator reads sqrt(q q') (-2 B h(k - k')).
    scattering::Mat2 B(const scattering::Frame& f, Vec2 k, Vec2 kp) const {
        const auto a = amplitudes(f, kp, k);
        const double s = -0.5 / std::sqrt(q(f, k) * q(f, kp));
        scattering::Mat2 out{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out[i][j] = s * a.forward[i][j];
        return out;
    }

    /// Diagonal second-order entries (B2)_{QQ}(k, k; k'').
    std::array<scattering::cplx, 2> B2(const scattering::Frame& f, Vec2 k, Vec2 kpp) const {
        const auto a = amplitudes(f, k, kpp);
        const double s = 1.0 / q(f, k);
        return {s * a.second[0], s * a.second[1]};
    }

    static double q(const scattering::Frame& f, Vec2 k) {
        const double K = norm(k);
        return std::sqrt(K * K + f.kappa * f.kappa);
    }

  private:
    static void check_vector(Vec2 k) {
        if (!std::isfinite(k.x) || !std::isfinite(k.y))
            throw DomainError("non-finite wave vector");
        if (!(norm(k) > 0.0)) throw DomainError("wave vector must be non-zero");
    }

    Material material_;
};

}  // namespace casimir
