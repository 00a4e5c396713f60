#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "casimir/kernel.hpp"
#include "casimir/surface_scattering.hpp"

using namespace casimir;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<Material> materials() {
    return {Material(PerfectConductor{}), Material(gold_drude()), Material(Plasma{9.0}), Material(Constant{4.0})};
}

double rel(scattering::cplx a, scattering::cplx b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace

TEST_CASE("flat amplitudes reproduce the basis reflection", "[scattering]") {
    for (const auto& m : materials()) {
        const KernelProvider prov(m);
        for (double xi : {0.0, 1e-3, 0.3, 5.0}) {
            const auto f = prov.frame(xi);
            for (double k : {1e-4, 3e-3, 0.05}) {
                const Vec2 k1{k, 0.0}, k2{0.6 * k, 0.8 * k};
                const auto a = prov.amplitudes(f, k1, k2);
                const auto r = KernelProvider::basis_reflection(m, xi, k);
                CHECK_THAT(a.r1[0].real(), WithinAbs(r.r_e, 1e-12));
                CHECK_THAT(a.r1[1].real(), WithinAbs(r.r_m, 1e-12));
                CHECK_THAT(a.r2[0].real(), WithinAbs(r.r_e, 1e-12));
                CHECK_THAT(a.r2[1].real(), WithinAbs(r.r_m, 1e-12));
            }
        }
    }
}

TEST_CASE("amplitudes are rotationally covariant", "[scattering][property]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> mag(-3.5, -1.0), ang(0.0, 2.0 * units::pi);
    for (const auto& m : materials()) {
        const KernelProvider prov(m);
        const BasisReflector flat2(Material(gold_drude()), 0.4);
        const auto f = prov.frame(0.4);
        for (int trial = 0; trial < 25; ++trial) {
            const Vec2 k1 = rotate(Vec2{std::pow(10.0, mag(rng)), 0.0}, ang(rng));
            const Vec2 k2 = rotate(Vec2{std::pow(10.0, mag(rng)), 0.0}, ang(rng));
            const double phi = ang(rng);
            const double v = kernel_integrand(prov, f, flat2, k1, k2, 50.0);
            const double w = kernel_integrand(prov, f, flat2, rotate(k1, phi), rotate(k2, phi), 50.0);
            CHECK_THAT(w, WithinRel(v, 1e-10));
            const auto a = prov.B(f, k1, k2), b = prov.B(f, rotate(k1, phi), rotate(k2, phi));
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) CHECK(rel(a[i][j], b[i][j]) < 1e-10);
        }
    }
}

TEST_CASE("first-order amplitudes are reciprocal", "[scattering]") {
    // q B_QQ'(k, k') = s_Q s_Q' q' B_Q'Q(k', k) with s = (+1, -1).
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> mag(-3.0, -1.0), ang(0.0, 2.0 * units::pi);
    const double sign[2] = {1.0, -1.0};
    for (const auto& m : materials()) {
        const KernelProvider prov(m);
        for (double xi : {0.0, 0.05, 2.0}) {
            const auto f = prov.frame(xi);
            for (int trial = 0; trial < 10; ++trial) {
                const Vec2 k = rotate(Vec2{std::pow(10.0, mag(rng)), 0.0}, ang(rng));
                const Vec2 kp = rotate(Vec2{std::pow(10.0, mag(rng)), 0.0}, ang(rng));
                const auto a = prov.B(f, k, kp), b = prov.B(f, kp, k);
                const double q = KernelProvider::q(f, k), qp = KernelProvider::q(f, kp);
                double scale = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) scale = std::max(scale, std::abs(q * a[i][j]));
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        const scattering::cplx lhs = q * a[i][j], rhs = sign[i] * sign[j] * qp * b[j][i];
                        CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
                    }
            }
        }
    }
}

TEST_CASE("static and dynamic integrands join continuously", "[scattering]") {
    for (const auto& m : {Material(PerfectConductor{}), Material(Constant{4.0})}) {
        const KernelProvider prov(m);
        const Vec2 k1{0.01, 0.002}, k2{-0.003, 0.012};
        const double d = 100.0;
        const double f0 = kernel_integrand(prov, prov.frame(0.0), BasisReflector(m, 0.0), k1, k2, d);
        const double xi = 1e-7;
        const double f1 = kernel_integrand(prov, prov.frame(xi), BasisReflector(m, xi), k1, k2, d);
        CHECK_THAT(f1, WithinRel(f0, 1e-4));
    }
}

TEST_CASE("a transparent flat plate gives a vanishing integrand", "[scattering]") {
    const PlatePair p{gold_drude(), Constant{1.0}, 300.0};
    const KernelProvider prov(p.material1);
    for (long n : {0L, 1L, 7L}) CHECK(f_n(prov, p, n, Vec2{0.01, 0.0}, Vec2{0.0, 0.02}, 40.0) == 0.0);
}

TEST_CASE("provider input checks", "[scattering]") {
    const KernelProvider prov{Material(gold_drude())};
    const auto f = prov.frame(0.2);
    CHECK_THROWS_AS(prov.amplitudes(f, Vec2{0.0, 0.0}, Vec2{0.01, 0.0}), DomainError);
    CHECK_THROWS_AS(prov.amplitudes(f, Vec2{std::nan(""), 0.0}, Vec2{0.01, 0.0}), DomainError);
    CHECK_THROWS_AS(prov.frame(-1.0), DomainError);
    const PlatePair p{gold_drude(), gold_drude(), 0.0};
    CHECK_THROWS_AS(f_n(prov, p, 1, Vec2{0.01, 0.0}, Vec2{0.02, 0.0}, 10.0), DomainError);
}

TEST_CASE("static sectors per material", "[scattering]") {
    using scattering::Boundary;
    const auto pc = KernelProvider::make_frame(Material(PerfectConductor{}), 0.0);
    CHECK(pc.electric == Boundary::dirichlet);
    CHECK(pc.magnetic == Boundary::neumann);
    const auto pl = KernelProvider::make_frame(Material(Plasma{9.0}), 0.0);
    CHECK(pl.magnetic == Boundary::london);
    const auto dr = KernelProvider::make_frame(Material(gold_drude()), 0.0);
    CHECK(dr.electric == Boundary::dirichlet);
    CHECK(dr.magnetic == Boundary::transparent);
    const auto c = KernelProvider::make_frame(Material(Constant{3.0}), 0.0);
    CHECK(c.electric == Boundary::potential_jump);
    const auto dyn = KernelProvider::make_frame(Material(gold_drude()), 1.0);
    CHECK(dyn.dynamic == Boundary::dielectric);
}
