#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "casimir/dielectric.hpp"

using namespace casimir;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::shared_ptr<const OpticalTable> drude_table(const Drude& m, double lo, double hi, int per_decade) {
    std::vector<double> e, y;
    const int n = static_cast<int>(std::lround(per_decade * std::log10(hi / lo)));
    for (int i = 0; i <= n; ++i) {
        const double w = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        e.push_back(w);
        y.push_back(m.plasma * m.plasma * m.damping / (w * (w * w + m.damping * m.damping)));
    }
    return std::make_shared<const OpticalTable>(e, y);
}

std::vector<PermittivityModel> sample_models() {
    return {gold_drude(), Drude{3.0, 0.0}, Plasma{9.0}, Constant{1.0}, Constant{3.0},
            Tabulated{drude_table(gold_drude(), 1e-4, 1e3, 20), gold_drude()}};
}

}  // namespace

TEST_CASE("closed-form permittivities", "[dielectric]") {
    CHECK_THAT(permittivity(gold_drude(), 9.0), WithinRel(1.0 + 81.0 / (9.0 * 9.035), 1e-14));
    CHECK_THAT(permittivity(gold_drude(), 9.0), WithinAbs(1.99613, 1e-5));
    CHECK_THAT(permittivity(Plasma{9.0}, 3.0), WithinRel(10.0, 1e-14));
    CHECK(permittivity(Constant{4.5}, 0.1) == 4.5);
    for (const auto& m : sample_models())
        if (!std::holds_alternative<Constant>(m)) CHECK_THAT(permittivity(m, 1e6), WithinAbs(1.0, 1e-6));
}

TEST_CASE("permittivity errors", "[dielectric]") {
    CHECK_THROWS_AS(permittivity(gold_drude(), 0.0), DomainError);
    CHECK_THROWS_AS(permittivity(gold_drude(), -1.0), DomainError);
    CHECK_THROWS_AS(permittivity(PerfectConductor{}, 1.0), UnsupportedError);
    CHECK_THROWS_AS(validate(Drude{-1.0, 0.1}), ValidationError);
    CHECK_THROWS_AS(validate(Drude{1.0, -0.1}), ValidationError);
    CHECK_THROWS_AS(validate(Plasma{0.0}), ValidationError);
    CHECK_THROWS_AS(validate(Constant{0.5}), ValidationError);
    CHECK_THROWS_AS(validate(Tabulated{nullptr, gold_drude()}), ValidationError);
    CHECK_NOTHROW(validate(gold_drude()));
}

TEST_CASE("Kramers-Kronig of a dense Drude table", "[dielectric]") {
    const Tabulated tab{drude_table(gold_drude(), 1e-5, 1e4, 100), gold_drude()};
    CHECK_THAT(permittivity(tab, 1.0), WithinRel(1.0 + 81.0 / 1.035, 1e-4));
    CHECK_THAT(permittivity(tab, 1.0), WithinAbs(79.261, 2e-2));
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double xi = 1e-3 * std::pow(10.0, i / 10.0);
        worst = std::max(worst, std::abs(permittivity(tab, xi) / permittivity(gold_drude(), xi) - 1.0));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("Kramers-Kronig splits at xi inside a segment", "[dielectric]") {
    // A coarse table puts xi strictly inside segments.
    const auto table = drude_table(Drude{5.0, 0.2}, 1e-3, 1e3, 4);
    const Tabulated tab{table, Drude{5.0, 0.2}};
    const double a = permittivity(tab, 0.37), b = permittivity(tab, 0.37 * (1 + 1e-9));
    CHECK_THAT(a, WithinRel(b, 1e-7));
    CHECK_THAT(a, WithinRel(permittivity(Drude{5.0, 0.2}, 0.37), 2e-2));
}

TEST_CASE("monotone permittivity above 1", "[dielectric]") {
    for (const auto& m : sample_models()) {
        double prev = numerics::infinity;
        for (int i = 0; i <= 60; ++i) {
            const double xi = 1e-3 * std::pow(10.0, i / 10.0);
            const double e = permittivity(m, xi);
            CHECK(e >= 1.0);
            CHECK(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }
}

TEST_CASE("Fresnel coefficients", "[dielectric]") {
    const auto vac = reflection(Constant{1.0}, 0.3, 0.01);
    CHECK(vac.r_e == 0.0);
    CHECK(vac.r_m == 0.0);
    const auto pc = reflection(PerfectConductor{}, 0.3, 0.01);
    CHECK(pc.r_e == 1.0);
    CHECK(pc.r_m == -1.0);
    const double xi = 0.5, kappa = units::wave_number(xi);
    const auto far = reflection(Constant{5.0}, xi, 1e3 * kappa);
    CHECK_THAT(far.r_e, WithinAbs(4.0 / 6.0, 1e-3));
    CHECK_THAT(far.r_m, WithinAbs(0.0, 1e-3));
    CHECK_THROWS_AS(reflection(gold_drude(), 0.0, 0.01), DomainError);
    CHECK_THROWS_AS(reflection(gold_drude(), 0.1, -0.01), DomainError);
}

TEST_CASE("reflection bounds and signs on a stress grid", "[dielectric]") {
    for (const auto& m : sample_models())
        for (int i = 0; i <= 12; ++i)
            for (int j = 0; j <= 12; ++j) {
                const double xi = 1e-4 * std::pow(10.0, i / 2.0), k = 1e-6 * std::pow(10.0, j / 2.0);
                const auto r = reflection(m, xi, k);
                CHECK(std::abs(r.r_e) <= 1.0);
                CHECK(std::abs(r.r_m) <= 1.0);
                CHECK(r.r_e >= 0.0);
                CHECK(r.r_m <= 0.0);
            }
}

TEST_CASE("random Fresnel inputs stay bounded", "[dielectric][property]") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> lg(-6.0, 4.0), le(0.0, 6.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double eps = 1.0 + std::pow(10.0, le(rng)) - 1.0;
        const auto r = fresnel(eps, std::pow(10.0, lg(rng)), std::pow(10.0, lg(rng)));
        CHECK(std::abs(r.r_e) <= 1.0);
        CHECK(std::abs(r.r_m) <= 1.0);
        CHECK(r.r_e >= 0.0);
        CHECK(r.r_m <= 0.0);
    }
}

TEST_CASE("zero-frequency limits", "[dielectric]") {
    const auto d = reflection_zero_freq(gold_drude(), 0.01);
    CHECK(d.r_e == 1.0);
    CHECK(d.r_m == 0.0);
    const auto c = reflection_zero_freq(Constant{3.0}, 0.2);
    CHECK_THAT(c.r_e, WithinRel(0.5, 1e-15));
    CHECK(c.r_m == 0.0);
    const auto pc = reflection_zero_freq(PerfectConductor{}, 0.2);
    CHECK(pc.r_e == 1.0);
    CHECK(pc.r_m == -1.0);
    const double k = 0.03, kp = 9.0 / units::hbar_c;
    const auto pl = reflection_zero_freq(Plasma{9.0}, k);
    CHECK_THAT(pl.r_m, WithinRel((k - std::hypot(k, kp)) / (k + std::hypot(k, kp)), 1e-14));
    CHECK_THROWS_AS(reflection_zero_freq(gold_drude(), 0.0), DomainError);
}

TEST_CASE("reflection approaches its zero-frequency limit", "[dielectric]") {
    for (const PermittivityModel& m : {PermittivityModel{Plasma{9.0}}, PermittivityModel{Constant{3.0}},
                                       PermittivityModel{PerfectConductor{}}})
        for (double k : {1e-3, 1e-1}) {
            const auto r = reflection(m, 1e-6, k), z = reflection_zero_freq(m, k);
            CHECK_THAT(r.r_e, WithinAbs(z.r_e, 1e-3));
            CHECK_THAT(r.r_m, WithinAbs(z.r_m, 1e-3));
        }
    const auto r = reflection(gold_drude(), 1e-8, 1e-2), z = reflection_zero_freq(gold_drude(), 1e-2);
    CHECK_THAT(r.r_e, WithinAbs(z.r_e, 1e-2));
    CHECK_THAT(r.r_m, WithinAbs(z.r_m, 1e-2));
}

TEST_CASE("optical table loading", "[dielectric]") {
    std::istringstream ok("# header\n0.1 500.0\n1.0 5.0\n");
    const auto t = load_optical_table(ok);
    CHECK(t.size() == 2);

    std::istringstream unsorted("1.0 5.0\n0.5 7.0\n");
    const auto s = load_optical_table(unsorted);
    CHECK(s.energy() == std::vector<double>{0.5, 1.0});
    CHECK(s.im_eps() == std::vector<double>{7.0, 5.0});

    std::istringstream neg("1.0 -2.0\n2.0 1.0\n");
    try {
        load_optical_table(neg);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }

    std::istringstream bad("0.1 1.0\n0.2 x\n");
    try {
        load_optical_table(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    std::istringstream dup("0.1 1.0\n0.2 2.0\n0.1 3.0\n");
    CHECK_THROWS_AS(load_optical_table(dup), ValidationError);
    std::istringstream one("0.1 1.0\n");
    CHECK_THROWS_AS(load_optical_table(one), ValidationError);
    std::istringstream three("0.1 1.0 2.0\n0.2 1.0\n");
    CHECK_THROWS_AS(load_optical_table(three), ParseError);
    std::istringstream zero("0.0 1.0\n0.2 1.0\n");
    CHECK_THROWS_AS(load_optical_table(zero), ValidationError);
}

TEST_CASE("shipped synthetic table", "[dielectric]") {
    std::ifstream in(std::string(CASIMIR_DATA_DIR) + "/gold_drude_synthetic.txt");
    REQUIRE(in);
    const auto t = load_optical_table(in);
    CHECK(t.size() > 100);
    const double w = t.energy()[t.size() / 2];
    CHECK_THAT(t.im_eps()[t.size() / 2], WithinRel(81.0 * 0.035 / (w * (w * w + 0.035 * 0.035)), 1e-10));
}

TEST_CASE("log-log interpolation between samples", "[dielectric]") {
    const OpticalTable t({1.0, 10.0, 100.0}, {100.0, 1.0, 0.0});
    CHECK_THAT(t.interpolate(std::sqrt(10.0)), WithinRel(10.0, 1e-13));
    CHECK_THAT(t.interpolate(55.0), WithinAbs(0.5, 1e-14));  // linear next to a zero sample
    CHECK(t.interpolate(0.5) == 100.0);
}

TEST_CASE("tabulated materials use a cached permittivity", "[dielectric]") {
    const Tabulated tab{drude_table(gold_drude(), 1e-5, 1e4, 40), gold_drude()};
    const Material m(tab);
    REQUIRE(m.tabulated());
    double worst = 0.0;
    for (int i = 0; i <= 140; ++i) {
        const double xi = 1e-3 * std::pow(10.0, i / 20.0 + 0.013);
        worst = std::max(worst, std::abs(m.epsilon(xi) / permittivity(tab, xi) - 1.0));
    }
    CHECK(worst < 1e-5);
    // Outside the cached range the transform is evaluated directly.
    CHECK_THAT(m.epsilon(3e4), WithinRel(permittivity(tab, 3e4), 1e-14));
}

TEST_CASE("materials forward to the model", "[dielectric]") {
    const Material m(gold_drude());
    CHECK_FALSE(m.perfect());
    CHECK(m.epsilon(2.0) == permittivity(gold_drude(), 2.0));
    const auto r = m.reflection(0.2, 0.004), s = reflection(gold_drude(), 0.2, 0.004);
    CHECK(r.r_e == s.r_e);
    CHECK(r.r_m == s.r_m);
    CHECK(Material(PerfectConductor{}).perfect());
    CHECK(describe(gold_drude()).find("drude") != std::string::npos);
}
