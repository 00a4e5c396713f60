#include <catch_amalgamated.hpp>

#include <cmath>

#include "casimir/lifshitz.hpp"

using namespace casimir;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double C = units::pi * units::pi * units::hbar_c / 720.0;

PlatePair pc(double T = 0.0) { return {PerfectConductor{}, PerfectConductor{}, T}; }
PlatePair gold(double T) { return {gold_drude(), gold_drude(), T}; }

}  // namespace

TEST_CASE("perfect conductors at T = 0", "[lifshitz]") {
    for (double d : {10.0, 50.0, 200.0, 1000.0, 1e4}) {
        CHECK_THAT(free_energy_pp(pc(), d).value, WithinRel(-C / std::pow(d, 3), 1e-6));
        CHECK_THAT(force_pp(pc(), d).value, WithinRel(-3.0 * C / std::pow(d, 4), 1e-6));
        CHECK_THAT(d2_free_energy_pp(pc(), d).value, WithinRel(-12.0 * C / std::pow(d, 5), 1e-6));
    }
    CHECK_THAT(force_pp(pc(), 100.0).value, WithinRel(-units::pi * units::pi * units::hbar_c / (240.0 * 1e8), 1e-6));
}

TEST_CASE("vacuum does not interact", "[lifshitz]") {
    for (double T : {0.0, 300.0}) {
        const PlatePair p{Constant{1.0}, gold_drude(), T};
        CHECK(free_energy_pp(p, 100.0).value == 0.0);
        CHECK(force_pp(p, 100.0).value == 0.0);
        CHECK(d2_free_energy_pp(p, 100.0).value == 0.0);
    }
}

TEST_CASE("domain checks", "[lifshitz]") {
    CHECK_THROWS_AS(free_energy_pp(pc(), 0.0), DomainError);
    CHECK_THROWS_AS(force_pp(pc(), -5.0), DomainError);
    CHECK_THROWS_AS(free_energy_pp(PlatePair{gold_drude(), gold_drude(), -1.0}, 10.0), ValidationError);
    CHECK_THROWS_AS(build_grid(300.0, 0.0), DomainError);
    CHECK_THROWS_AS(build_grid(-1.0, 10.0), DomainError);
}

TEST_CASE("frequency grids", "[lifshitz]") {
    const auto g = build_grid(300.0, 100.0);
    CHECK(g.mode == FrequencyGrid::Mode::finite_t);
    CHECK(g.xi.front() == 0.0);
    CHECK(g.weight.front() == 0.5 * units::k_boltzmann * 300.0);
    CHECK_THAT(g.matsubara(1), WithinRel(0.162433, 1e-5));
    for (std::size_t i = 1; i < g.xi.size(); ++i) CHECK(g.xi[i] > g.xi[i - 1]);
    CHECK(g.envelope_terms <= g.n_max + 1);
    CHECK_THAT(units::thermal_wavelength(300.0), WithinRel(7633.0, 1e-3));

    const auto z = build_grid(0.0, 100.0);
    CHECK(z.mode == FrequencyGrid::Mode::zero_t);
    double total = 0.0;
    for (double w : z.weight) {
        CHECK(w > 0.0);
        total += w;
    }
    // The fixed rule integrates e^{-t} to high accuracy.
    double ex = 0.0;
    for (std::size_t i = 0; i < z.xi.size(); ++i) ex += z.weight[i] * std::exp(-z.xi[i] / z.scale);
    CHECK_THAT(ex, WithinRel(z.scale / (2.0 * units::pi), 1e-12));
    CHECK(total > 0.0);
}

TEST_CASE("Drude gold: analytic derivatives match differences", "[lifshitz]") {
    const PlatePair p = gold(300.0);
    const double d = 200.0;
    numerics::DiffSpec spec;
    spec.step = 4.0;
    spec.levels = 3;
    const auto e = [&](double x) { return free_energy_pp(p, x).value; };
    const double fd1 = -(8.0 * (e(d + 1.0) - e(d - 1.0)) - (e(d + 2.0) - e(d - 2.0))) / 12.0;
    CHECK_THAT(force_pp(p, d).value, WithinRel(fd1, 1e-5));
    const auto fd2 = numerics::second_derivative_at(e, d, spec);
    CHECK_THAT(d2_free_energy_pp(p, d).value, WithinRel(fd2.value, 1e-4));
}

TEST_CASE("attraction and monotonic decay", "[lifshitz]") {
    for (const double T : {0.0, 300.0}) {
        double prev = -numerics::infinity;
        for (int i = 0; i <= 8; ++i) {
            const double d = 10.0 * std::pow(10.0, i / 4.0);
            const double e = free_energy_pp(gold(T), d).value;
            CHECK(e < 0.0);
            CHECK(force_pp(gold(T), d).value < 0.0);
            CHECK(e > prev);
            prev = e;
        }
    }
}

TEST_CASE("thermal change below 200 nm", "[lifshitz]") {
    const double hot = free_energy_pp(gold(300.0), 150.0).value;
    const double cold = free_energy_pp(gold(0.0), 150.0).value;
    CHECK(std::abs(hot - cold) / std::abs(cold) < 0.03);
}

TEST_CASE("classical limit at large separation", "[lifshitz]") {
    const double d = 10.0 * units::thermal_wavelength(300.0);
    const double classical = -units::k_boltzmann * 300.0 * units::zeta3 / (16.0 * units::pi * d * d);
    CHECK_THAT(free_energy_pp(gold(300.0), d).value, WithinRel(classical, 1e-2));
}

TEST_CASE("dielectric interpolates towards the perfect conductor", "[lifshitz]") {
    const double d = 100.0;
    double prev = 0.0;
    for (double eps : {2.0, 5.0, 20.0, 100.0, 1e4}) {
        const double e = free_energy_pp(PlatePair{Constant{eps}, Constant{eps}, 0.0}, d).value;
        CHECK(std::abs(e) > std::abs(prev));
        prev = e;
    }
    CHECK_THAT(prev, WithinRel(-C / std::pow(d, 3), 0.1));
}

TEST_CASE("asymmetric pairs are symmetric in the materials", "[lifshitz]") {
    const PlatePair a{gold_drude(), Constant{4.0}, 300.0}, b{Constant{4.0}, gold_drude(), 300.0};
    CHECK_THAT(free_energy_pp(a, 80.0).value, WithinRel(free_energy_pp(b, 80.0).value, 1e-12));
}
